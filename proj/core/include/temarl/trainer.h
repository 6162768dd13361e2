#ifndef TEMARL_TRAINER_H_
#define TEMARL_TRAINER_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "temarl/checkpoint.h"
#include "temarl/empowerment.h"
#include "temarl/maddpg.h"
#include "temarl/particle_env.h"
#include "temarl/replay_buffer.h"
#include "temarl/transition_model.h"

namespace temarl {

class KeyValueConfig;

enum class Method { kBaseline, kEmpowerment, kSocialInfluence };

std::string_view MethodName(Method m);
Method ParseMethod(std::string_view name);

struct TrainerConfig {
  env::ScenarioConfig scenario;
  Method method = Method::kBaseline;
  std::uint64_t seed = 0;
  int episodes = 10000;
  std::size_t buffer_capacity = 1000000;
  int batch_size = 1024;
  int warmup = 1024;  // transitions stored before the first update
  MaddpgConfig maddpg;

  // Empowerment (method = empowerment).
  double beta = 1.0;
  bool empowerment_in_critic = true;   // beta * sum_j E^j(o') added to y
  bool empowerment_in_policy = true;   // direct ascent of the bound on pi_j
  double empowerment_policy_weight = 1.0;  // scales that ascent's step size
  int empowerment_batch = 256;
  EmpowermentConfig empowerment;
  TransitionModelConfig transition;

  // Social influence (method = social_influence).
  double beta_si = 1.0;

  int checkpoint_every = 1000;  // 0 disables periodic checkpoints

  // Reads every key this struct knows; unknown keys are ignored.
  static TrainerConfig FromKeyValues(const KeyValueConfig& kv);
  void validate() const;
  bool empowerment_active() const { return method == Method::kEmpowerment; }
  bool influence_active() const { return method == Method::kSocialInfluence && beta_si != 0.0; }
};

struct EpisodeMetrics {
  int episode = 0;  // 1-based
  double mean_step_reward = 0.0;
  double mean_distance = 0.0;
  double collision_rate = 0.0;
  double empowerment_bound = 0.0;  // sum over agents of the mean bound this update
  double social_influence = 0.0;   // mean influence reward this update
  double wall_clock_s = 0.0;
  bool updated = false;
};

// Algorithm driver: rolls out one exploratory episode into the replay
// buffer, then (past warm-up) updates every agent's critic and actor, the
// intrinsic-reward machinery, and the target networks.
class Trainer {
 public:
  explicit Trainer(const TrainerConfig& config);

  EpisodeMetrics run_episode();
  // Runs the remaining episodes. `on_checkpoint` fires every
  // checkpoint_every episodes and after the last one.
  void train(const std::function<void(const EpisodeMetrics&)>& on_episode,
             const std::function<void(int episode, const Checkpoint&)>& on_checkpoint = {});

  Checkpoint checkpoint() const;

  const TrainerConfig& config() const { return config_; }
  const std::vector<AgentLearner>& learners() const { return learners_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  int episode() const { return episode_; }
  long updates() const { return updates_; }

 private:
  void update(EpisodeMetrics& m);

  TrainerConfig config_;
  std::vector<AgentSpec> specs_;
  JointLayout layout_;
  std::vector<AgentLearner> learners_;
  ReplayBuffer buffer_;
  std::unique_ptr<TransitionModel> model_;
  std::vector<EmpowermentEstimator> estimators_;
  std::vector<AdamState> ascent_opts_;  // per estimator, on its target's actor
  Rng env_rng_, act_rng_, sample_rng_, target_rng_, actor_rng_, aux_rng_;
  int episode_ = 0;
  long updates_ = 0;
  std::chrono::steady_clock::time_point start_;
};

// Actors plus the scenario they were trained on, enough to act greedily.
struct PolicySet {
  env::ScenarioConfig scenario;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<DenseNet> actors;
};

PolicySet PoliciesFromCheckpoint(const Checkpoint& ckpt);
PolicySet LoadPolicies(const std::string& path);

}  // namespace temarl

#endif  // TEMARL_TRAINER_H_
