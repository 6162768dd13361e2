#ifndef TEMARL_MADDPG_H_
#define TEMARL_MADDPG_H_

#include <vector>

#include "temarl/autodiff.h"
#include "temarl/dense_net.h"
#include "temarl/gumbel.h"
#include "temarl/optim.h"
#include "temarl/random.h"
#include "temarl/replay_buffer.h"

namespace temarl {

struct MaddpgConfig {
  int hidden = 64;
  double gamma = 0.95;
  double polyak = 0.01;
  double temperature = 1.0;
  double grad_clip = 0.5;         // <= 0 disables
  double actor_logit_reg = 1e-3;  // weight on mean(logits^2)
  // false: each critic sees only its own agent's observation and action.
  bool centralized_critic = true;
  AdamConfig actor_adam;
  AdamConfig critic_adam;

  void validate() const;
};

// Decentralized actor plus critic for one agent. A centralized critic reads
// [o_0, ..., o_{n-1}, a_0, ..., a_{n-1}] with one-hot actions.
class AgentLearner {
 public:
  AgentLearner(int index, const std::vector<AgentSpec>& agents, const MaddpgConfig& config, Rng& rng);

  int index() const { return index_; }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  const MaddpgConfig& config() const { return config_; }

  // The critic's input rows for per-agent observation and action batches.
  Matrix critic_input(const std::vector<Matrix>& obs, const std::vector<Matrix>& actions) const;

  DenseNet actor;
  DenseNet critic;
  DenseNet target_actor;
  DenseNet target_critic;
  AdamState actor_opt;
  AdamState critic_opt;

 private:
  int index_;
  std::vector<AgentSpec> agents_;
  MaddpgConfig config_;
};

int CriticInputDim(const std::vector<AgentSpec>& agents);

// Column-concatenates observations then actions in agent order.
Matrix CriticInput(const std::vector<Matrix>& obs, const std::vector<Matrix>& actions);

// explore: straight-through Gumbel-Softmax hard samples; otherwise argmax.
std::vector<OneHot> SelectActions(const std::vector<AgentLearner>& learners, const std::vector<Vector>& obs,
                                  bool explore, Rng& rng);

// Hard Gumbel samples of every target actor at the next observations.
std::vector<Matrix> TargetActions(const std::vector<AgentLearner>& learners, const std::vector<Matrix>& next_obs,
                                  Rng& rng);

// Q_target(o', a') for one learner, no tape involved.
Vector TargetValue(const AgentLearner& learner, const std::vector<Matrix>& next_obs,
                   const std::vector<Matrix>& next_actions);

// y = r + intrinsic + gamma * target_value, elementwise. Throws TrainingError
// on non-finite input.
Vector CriticTarget(const Vector& reward, const Vector& intrinsic, double gamma, const Vector& target_value);

// mean (Q(o, a) - y)^2 over the minibatch.
Var CriticLoss(Tape& tape, AgentLearner& learner, const Minibatch& batch, const Vector& y);
// One Adam step on the critic toward fixed targets y. Returns the mean squared
// TD error before the step.
double CriticUpdate(AgentLearner& learner, const Minibatch& batch, const Vector& y);

// Loss whose gradient the actor step follows: -mean Q(o, a) with the learner's
// own action resampled from its actor, plus the logit regularizer. `noise`
// fixes the Gumbel draw (rows x action_dim).
Var ActorLoss(Tape& tape, AgentLearner& learner, const Minibatch& batch, const Matrix& noise);

// One Adam step on the actor. Returns the loss before the step.
double ActorUpdate(AgentLearner& learner, const Minibatch& batch, Rng& rng);

void UpdateTargets(AgentLearner& learner);

}  // namespace temarl

#endif  // TEMARL_MADDPG_H_
