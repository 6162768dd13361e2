#include "temarl/maddpg.h"

#include <cmath>
#include <utility>

#include "temarl/errors.h"

namespace temarl {

void MaddpgConfig::validate() const {
  Require(hidden >= 1, "hidden width must be positive");
  Require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  Require(polyak > 0.0 && polyak <= 1.0, "polyak rate must lie in (0, 1]");
  Require(temperature > 0.0, "Gumbel temperature must be positive");
  Require(actor_logit_reg >= 0.0, "actor logit regularization must be non-negative");
}

int CriticInputDim(const std::vector<AgentSpec>& agents) {
  int d = 0;
  for (const AgentSpec& a : agents) d += a.obs_dim + a.action_dim;
  return d;
}

AgentLearner::AgentLearner(int index, const std::vector<AgentSpec>& agents, const MaddpgConfig& config,
                           Rng& rng)
    : index_(index), agents_(agents), config_(config) {
  config_.validate();
  Require(index >= 0 && index < static_cast<int>(agents.size()), "agent index out of range");
  const AgentSpec& me = agents[static_cast<std::size_t>(index)];
  const std::string tag = "agent" + std::to_string(index);
  const int h = config.hidden;
  actor = DenseNet(tag + ".actor", {me.obs_dim, h, h, me.action_dim}, Activation::kRelu, Activation::kIdentity,
                   rng);
  const int critic_in = config.centralized_critic ? CriticInputDim(agents) : me.obs_dim + me.action_dim;
  critic = DenseNet(tag + ".critic", {critic_in, h, h, 1}, Activation::kRelu,
                    Activation::kIdentity, rng);
  target_actor = actor;
  target_critic = critic;
  actor_opt = AdamState(actor.parameters(), config.actor_adam);
  critic_opt = AdamState(critic.parameters(), config.critic_adam);
}

Matrix AgentLearner::critic_input(const std::vector<Matrix>& obs, const std::vector<Matrix>& actions) const {
  if (config_.centralized_critic) return CriticInput(obs, actions);
  const auto me = static_cast<std::size_t>(index_);
  return CriticInput({obs.at(me)}, {actions.at(me)});
}

Matrix CriticInput(const std::vector<Matrix>& obs, const std::vector<Matrix>& actions) {
  Require(obs.size() == actions.size() && !obs.empty(), "critic input needs one obs and action per agent");
  const Eigen::Index rows = obs[0].rows();
  Eigen::Index cols = 0;
  for (const Matrix& m : obs) cols += m.cols();
  for (const Matrix& m : actions) cols += m.cols();
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (const auto* group : {&obs, &actions}) {
    for (const Matrix& m : *group) {
      Require(m.rows() == rows, "critic input row mismatch");
      out.middleCols(c, m.cols()) = m;
      c += m.cols();
    }
  }
  return out;
}

std::vector<OneHot> SelectActions(const std::vector<AgentLearner>& learners, const std::vector<Vector>& obs,
                                  bool explore, Rng& rng) {
  Require(obs.size() == learners.size(), "one observation per agent required");
  std::vector<OneHot> out;
  out.reserve(learners.size());
  for (std::size_t i = 0; i < learners.size(); ++i) {
    const Vector logits = learners[i].actor.forward(obs[i]);
    if (explore) {
      out.push_back(GumbelSoftmaxSample(logits, learners[i].config().temperature, rng).hard);
    } else {
      Eigen::Index best = 0;
      logits.maxCoeff(&best);
      out.emplace_back(static_cast<int>(logits.size()), static_cast<int>(best));
    }
  }
  return out;
}

std::vector<Matrix> TargetActions(const std::vector<AgentLearner>& learners, const std::vector<Matrix>& next_obs,
                                  Rng& rng) {
  Require(next_obs.size() == learners.size(), "one observation batch per agent required");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < learners.size(); ++i) {
    const Matrix logits = learners[i].target_actor.forward(next_obs[i]);
    const Matrix noisy = logits + SampleGumbel(logits.rows(), logits.cols(), rng);
    out.push_back(OneHotRows(ArgmaxRows(noisy), static_cast<int>(logits.cols())));
  }
  return out;
}

Vector TargetValue(const AgentLearner& learner, const std::vector<Matrix>& next_obs,
                   const std::vector<Matrix>& next_actions) {
  return learner.target_critic.forward(learner.critic_input(next_obs, next_actions)).col(0);
}

Vector CriticTarget(const Vector& reward, const Vector& intrinsic, double gamma, const Vector& target_value) {
  Require(reward.size() == intrinsic.size() && reward.size() == target_value.size(),
          "critic target inputs differ in length");
  if (!reward.allFinite()) throw TrainingError("critic target: non-finite reward");
  if (!intrinsic.allFinite()) throw TrainingError("critic target: non-finite intrinsic reward");
  if (!target_value.allFinite()) throw TrainingError("critic target: non-finite target critic value");
  return reward + intrinsic + gamma * target_value;
}

namespace {

void ClipAndStep(DenseNet& net, AdamState& opt, GradientMap& grads, double clip) {
  std::vector<Parameter*> params = net.parameters();
  if (clip > 0.0) ClipGradNorm(grads, params, clip);
  AdamStep(opt, params, grads);
}

}  // namespace

Var CriticLoss(Tape& tape, AgentLearner& learner, const Minibatch& batch, const Vector& y) {
  Var x = tape.constant(learner.critic_input(batch.obs, batch.actions));
  Var q = learner.critic.forward(tape, x);
  return tape.mean(tape.square(tape.sub(q, tape.constant(y))));
}

double CriticUpdate(AgentLearner& learner, const Minibatch& batch, const Vector& y) {
  Require(batch.size() >= 1, "critic update needs a non-empty minibatch");
  Require(y.size() == batch.size(), "critic targets do not match the minibatch");
  Tape tape;
  Var loss = CriticLoss(tape, learner, batch, y);
  const double value = tape.scalar(loss);
  if (!std::isfinite(value)) throw TrainingError(learner.critic.name() + ": non-finite critic loss");
  GradientMap grads = tape.backward(loss);
  ClipAndStep(learner.critic, learner.critic_opt, grads, learner.config().grad_clip);
  return value;
}

Var ActorLoss(Tape& tape, AgentLearner& learner, const Minibatch& batch, const Matrix& noise) {
  const auto me = static_cast<std::size_t>(learner.index());
  Var logits = learner.actor.forward(tape, tape.constant(batch.obs[me]));
  GumbelBatch own = GumbelSoftmax(tape, logits, noise, learner.config().temperature);
  std::vector<Var> parts;
  if (learner.config().centralized_critic) {
    for (const Matrix& o : batch.obs) parts.push_back(tape.constant(o));
    for (std::size_t i = 0; i < batch.actions.size(); ++i) {
      parts.push_back(i == me ? own.action : tape.constant(batch.actions[i]));
    }
  } else {
    parts = {tape.constant(batch.obs[me]), own.action};
  }
  Var q = learner.critic.forward_frozen(tape, tape.concat_cols(parts));
  Var loss = tape.scale(tape.mean(q), -1.0);
  if (learner.config().actor_logit_reg > 0.0) {
    loss = tape.add(loss, tape.scale(tape.mean(tape.square(logits)), learner.config().actor_logit_reg));
  }
  return loss;
}

double ActorUpdate(AgentLearner& learner, const Minibatch& batch, Rng& rng) {
  Require(batch.size() >= 1, "actor update needs a non-empty minibatch");
  const AgentSpec& me = learner.agents()[static_cast<std::size_t>(learner.index())];
  const Matrix noise = SampleGumbel(batch.size(), me.action_dim, rng);
  Tape tape;
  Var loss = ActorLoss(tape, learner, batch, noise);
  const double value = tape.scalar(loss);
  if (!std::isfinite(value)) throw TrainingError(learner.actor.name() + ": non-finite actor loss");
  GradientMap grads = tape.backward(loss);
  ClipAndStep(learner.actor, learner.actor_opt, grads, learner.config().grad_clip);
  return value;
}

void UpdateTargets(AgentLearner& learner) {
  const double tau = learner.config().polyak;
  PolyakUpdate(learner.target_actor.parameters(), std::as_const(learner.actor).parameters(), tau);
  PolyakUpdate(learner.target_critic.parameters(), std::as_const(learner.critic).parameters(), tau);
}

}  // namespace temarl
