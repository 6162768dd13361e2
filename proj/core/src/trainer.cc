#include "temarl/trainer.h"

#include <cmath>

#include "temarl/errors.h"
#include "temarl/kv_config.h"
#include "temarl/social_influence.h"

namespace temarl {

std::string_view MethodName(Method m) {
  switch (m) {
    case Method::kBaseline:
      return "baseline";
    case Method::kEmpowerment:
      return "empowerment";
    case Method::kSocialInfluence:
      return "social_influence";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  if (name == "baseline") return Method::kBaseline;
  if (name == "empowerment") return Method::kEmpowerment;
  if (name == "social_influence") return Method::kSocialInfluence;
  throw ContractViolation("unknown method '" + std::string(name) + "'");
}

TrainerConfig TrainerConfig::FromKeyValues(const KeyValueConfig& kv) {
  TrainerConfig c;
  c.scenario = env::ScenarioConfig::FromKeyValues(kv);
  c.method = ParseMethod(kv.get_string("method", "baseline"));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  c.episodes = static_cast<int>(kv.get_int("episodes", c.episodes));
  c.buffer_capacity = static_cast<std::size_t>(kv.get_int("buffer_capacity", static_cast<long>(c.buffer_capacity)));
  c.batch_size = static_cast<int>(kv.get_int("batch_size", c.batch_size));
  c.warmup = static_cast<int>(kv.get_int("warmup", c.warmup));

  MaddpgConfig& m = c.maddpg;
  m.hidden = static_cast<int>(kv.get_int("hidden", m.hidden));
  m.gamma = kv.get_double("gamma", m.gamma);
  m.polyak = kv.get_double("polyak", m.polyak);
  m.temperature = kv.get_double("temperature", m.temperature);
  m.grad_clip = kv.get_double("grad_clip", m.grad_clip);
  m.actor_logit_reg = kv.get_double("actor_logit_reg", m.actor_logit_reg);
  m.centralized_critic = kv.get_bool("centralized_critic", m.centralized_critic);
  const double lr = kv.get_double("lr", m.actor_adam.learning_rate);
  m.actor_adam.learning_rate = kv.get_double("actor_lr", lr);
  m.critic_adam.learning_rate = kv.get_double("critic_lr", lr);

  c.beta = kv.get_double("beta", c.beta);
  c.empowerment_in_critic = kv.get_bool("empowerment_in_critic", c.empowerment_in_critic);
  c.empowerment_in_policy = kv.get_bool("empowerment_in_policy", c.empowerment_in_policy);
  c.empowerment_policy_weight = kv.get_double("empowerment_policy_weight", c.empowerment_policy_weight);
  c.empowerment_batch = static_cast<int>(kv.get_int("empowerment_batch", c.empowerment_batch));
  EmpowermentConfig& e = c.empowerment;
  const std::string mode = kv.get_string("empowerment_mode", "enumerate");
  Require(mode == "enumerate" || mode == "sample", "empowerment_mode must be 'enumerate' or 'sample'");
  e.mode = mode == "enumerate" ? EstimatorMode::kEnumerate : EstimatorMode::kSample;
  e.mc_samples = static_cast<int>(kv.get_int("mc_samples", e.mc_samples));
  e.shaping_samples = static_cast<int>(kv.get_int("shaping_samples", e.shaping_samples));
  e.decoder_sees_next_obs = kv.get_bool("decoder_sees_next_obs", e.decoder_sees_next_obs);
  e.grad_clip = kv.get_double("empowerment_grad_clip", e.grad_clip);
  e.adam.learning_rate = kv.get_double("empowerment_lr", e.adam.learning_rate);
  e.hidden = m.hidden;
  c.transition.adam.learning_rate = kv.get_double("model_lr", c.transition.adam.learning_rate);
  c.transition.hidden = m.hidden;

  c.beta_si = kv.get_double("beta_si", c.beta_si);
  c.checkpoint_every = static_cast<int>(kv.get_int("checkpoint_every", c.checkpoint_every));
  c.validate();
  return c;
}

void TrainerConfig::validate() const {
  scenario.validate();
  maddpg.validate();
  Require(episodes >= 1, "episodes must be >= 1");
  Require(batch_size >= 1, "batch_size must be >= 1");
  Require(warmup >= 0, "warmup must be >= 0");
  Require(buffer_capacity >= static_cast<std::size_t>(batch_size), "buffer capacity must hold one minibatch");
  Require(empowerment_batch >= 1, "empowerment_batch must be >= 1");
  Require(empowerment_policy_weight >= 0.0, "empowerment_policy_weight must be >= 0");
  Require(checkpoint_every >= 0, "checkpoint_every must be >= 0");
}

namespace {

// Independent RNG streams, so switching one subsystem on or off never shifts
// another's draws.
enum Stream : std::uint64_t {
  kInitStream = 1,
  kEnvStream,
  kActStream,
  kSampleStream,
  kTargetStream,
  kActorStream,
  kAuxInitStream,
  kAuxStream,
};

std::vector<AgentSpec> Specs(const env::ScenarioConfig& s) {
  std::vector<AgentSpec> out;
  for (int i = 0; i < env::kNumAgents; ++i) out.push_back({env::ObsDim(s, i), env::ActionDim(s, i)});
  return out;
}

}  // namespace

Trainer::Trainer(const TrainerConfig& config)
    : config_(config),
      specs_(Specs(config.scenario)),
      layout_{specs_},
      buffer_(specs_, config.buffer_capacity),
      env_rng_(DeriveSeed(config.seed, kEnvStream)),
      act_rng_(DeriveSeed(config.seed, kActStream)),
      sample_rng_(DeriveSeed(config.seed, kSampleStream)),
      target_rng_(DeriveSeed(config.seed, kTargetStream)),
      actor_rng_(DeriveSeed(config.seed, kActorStream)),
      aux_rng_(DeriveSeed(config.seed, kAuxStream)),
      start_(std::chrono::steady_clock::now()) {
  config_.validate();
  Rng init(DeriveSeed(config.seed, kInitStream));
  for (int i = 0; i < env::kNumAgents; ++i) learners_.emplace_back(i, specs_, config_.maddpg, init);
  Rng aux_init(DeriveSeed(config.seed, kAuxInitStream));
  if (config_.empowerment_active() || config_.influence_active()) {
    model_ = std::make_unique<TransitionModel>(layout_, config_.transition, aux_init);
  }
  if (config_.empowerment_active()) {
    AdamConfig ascent = config_.maddpg.actor_adam;
    ascent.learning_rate *= config_.empowerment_policy_weight * std::max(config_.beta, 0.0);
    for (int j = 0; j < env::kNumAgents; ++j) {
      estimators_.emplace_back(layout_, j, 1 - j, config_.empowerment, aux_init);
      if (ascent.learning_rate > 0.0) {
        ascent_opts_.emplace_back(learners_[static_cast<std::size_t>(j)].actor.parameters(), ascent);
      }
    }
  }
}

EpisodeMetrics Trainer::run_episode() {
  Require(episode_ < config_.episodes, "all configured episodes have been run");
  const env::ScenarioConfig& sc = config_.scenario;
  EpisodeMetrics m;
  m.episode = episode_ + 1;
  env::WorldState state = env::Reset(sc, env_rng_());
  double reward_sum = 0.0, distance_sum = 0.0;
  int collisions = 0;
  for (int t = 0; t < sc.episode_length; ++t) {
    const env::JointObservation o = env::Observe(state, sc);
    const std::vector<Vector> obs = {o.speaker, o.listener};
    const std::vector<OneHot> actions = SelectActions(learners_, obs, true, act_rng_);
    env::StepResult r = env::Step(state, {actions[env::kSpeaker], actions[env::kListener]}, sc);
    const env::JointObservation o2 = env::Observe(r.state, sc);
    buffer_.add({obs, actions, r.reward, {o2.speaker, o2.listener}});
    reward_sum += r.reward;
    distance_sum += r.state.target_distance();
    collisions += r.collision ? 1 : 0;
    state = std::move(r.state);
  }
  const double steps = sc.episode_length;
  m.mean_step_reward = reward_sum / steps;
  m.mean_distance = distance_sum / steps;
  m.collision_rate = collisions / steps;
  ++episode_;
  const auto need = static_cast<std::size_t>(std::max(config_.warmup, config_.batch_size));
  if (buffer_.size() >= need) {
    try {
      update(m);
    } catch (const TrainingError& e) {
      throw TrainingError("episode " + std::to_string(m.episode) + ": " + e.what());
    }
    m.updated = true;
  }
  m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return m;
}

void Trainer::update(EpisodeMetrics& m) {
  const auto batch_size = static_cast<std::size_t>(config_.batch_size);
  const bool emp = config_.empowerment_active();
  const bool si = config_.influence_active();
  std::vector<const DenseNet*> policies;
  for (const AgentLearner& l : learners_) policies.push_back(&l.actor);

  // One minibatch shared by all agents, so the intrinsic terms are computed once.
  const Minibatch batch = buffer_.sample(batch_size, sample_rng_);
  Vector intrinsic = Vector::Zero(batch.size());
  if (emp && config_.empowerment_in_critic && config_.beta != 0.0) {
    intrinsic += IntrinsicReward(estimators_, ConcatCols(batch.next_obs), policies, *model_, config_.beta, aux_rng_);
  }
  if (si) {
    const Vector influence = SocialInfluence(ConcatCols(batch.obs), ConcatCols(batch.actions), env::kSpeaker,
                                             env::kListener, learners_[env::kSpeaker].actor,
                                             learners_[env::kListener].actor, *model_);
    m.social_influence = influence.mean();
    intrinsic += config_.beta_si * influence;
  }
  for (AgentLearner& learner : learners_) {
    const Vector target_value =
        TargetValue(learner, batch.next_obs, TargetActions(learners_, batch.next_obs, target_rng_));
    const Vector y = CriticTarget(batch.reward, intrinsic, config_.maddpg.gamma, target_value);
    CriticUpdate(learner, batch, y);
    ActorUpdate(learner, batch, actor_rng_);
  }

  if (emp || si) {
    const Minibatch aux = buffer_.sample(batch_size, aux_rng_);
    model_->fit(aux);
    if (emp) {
      const auto n = std::min<Eigen::Index>(config_.empowerment_batch, aux.size());
      const Matrix obs = ConcatCols(aux.obs).topRows(n);
      double bound = 0.0;
      for (std::size_t i = 0; i < estimators_.size(); ++i) {
        EmpowermentEstimator& e = estimators_[i];
        AgentLearner& tgt = learners_[static_cast<std::size_t>(e.target())];
        AdamState* ascent = (config_.empowerment_in_policy && !ascent_opts_.empty()) ? &ascent_opts_[i] : nullptr;
        bound += e.optimize(obs, tgt.actor, ascent, config_.maddpg.grad_clip, *model_, aux_rng_);
      }
      m.empowerment_bound = bound;
    }
  }
  for (AgentLearner& learner : learners_) UpdateTargets(learner);
  ++updates_;
}

void Trainer::train(const std::function<void(const EpisodeMetrics&)>& on_episode,
                    const std::function<void(int, const Checkpoint&)>& on_checkpoint) {
  while (episode_ < config_.episodes) {
    const EpisodeMetrics m = run_episode();
    if (on_episode) on_episode(m);
    const bool periodic = config_.checkpoint_every > 0 && episode_ % config_.checkpoint_every == 0;
    if (on_checkpoint && (periodic || episode_ == config_.episodes)) on_checkpoint(episode_, checkpoint());
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.meta = config_.scenario.to_meta();
  c.meta["method"] = std::string(MethodName(config_.method));
  c.meta["seed"] = std::to_string(config_.seed);
  c.meta["episode"] = std::to_string(episode_);
  c.meta["hidden"] = std::to_string(config_.maddpg.hidden);
  c.meta["centralized_critic"] = config_.maddpg.centralized_critic ? "true" : "false";
  for (const AgentLearner& l : learners_) {
    const std::string tag = "agent" + std::to_string(l.index());
    c.put_net(tag + ".actor", l.actor);
    c.put_net(tag + ".critic", l.critic);
    c.put_net(tag + ".target_actor", l.target_actor);
    c.put_net(tag + ".target_critic", l.target_critic);
  }
  if (model_) c.put_net("transition", model_->net());
  for (const EmpowermentEstimator& e : estimators_) {
    c.put_net(e.behavior.name(), e.behavior);
    c.put_net(e.decoder.name(), e.decoder);
  }
  return c;
}

PolicySet PoliciesFromCheckpoint(const Checkpoint& ckpt) {
  PolicySet p;
  p.scenario = env::ScenarioConfig::FromMeta(ckpt.meta);
  p.method = ckpt.meta_at("method");
  p.seed = std::stoull(ckpt.meta_at("seed"));
  const int hidden = std::stoi(ckpt.meta_at("hidden"));
  Rng unused(0);
  for (int i = 0; i < env::kNumAgents; ++i) {
    const std::string name = "agent" + std::to_string(i) + ".actor";
    DenseNet net(name, {env::ObsDim(p.scenario, i), hidden, hidden, env::ActionDim(p.scenario, i)},
                 Activation::kRelu, Activation::kIdentity, unused);
    ckpt.get_net(name, net);
    p.actors.push_back(std::move(net));
  }
  return p;
}

PolicySet LoadPolicies(const std::string& path) { return PoliciesFromCheckpoint(LoadCheckpoint(path)); }

}  // namespace temarl
