#include "temarl/particle_env.h"

#include <cstdio>
#include <ostream>

#include "temarl/errors.h"
#include "temarl/kv_config.h"
#include "temarl/random.h"

namespace temarl::env {

std::string_view ScenarioName(Scenario s) {
  switch (s) {
    case Scenario::kSimple:
      return "simple";
    case Scenario::kChallenging:
      return "challenging";
    case Scenario::kHard:
      return "hard";
  }
  return "unknown";
}

Scenario ParseScenario(std::string_view name) {
  if (name == "simple") return Scenario::kSimple;
  if (name == "challenging") return Scenario::kChallenging;
  if (name == "hard") return Scenario::kHard;
  throw ContractViolation("unknown scenario '" + std::string(name) + "'");
}

ScenarioConfig ScenarioConfig::For(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  switch (s) {
    case Scenario::kSimple:
      c.landmarks = 3;
      c.vocabulary = 3;
      c.obstacles = 0;
      break;
    case Scenario::kChallenging:
      c.landmarks = 6;
      c.vocabulary = 5;
      c.obstacles = 0;
      break;
    case Scenario::kHard:
      c.landmarks = 6;
      c.vocabulary = 5;
      c.obstacles = 6;
      break;
  }
  return c;
}

ScenarioConfig ScenarioConfig::FromKeyValues(const KeyValueConfig& kv) {
  ScenarioConfig c = For(ParseScenario(kv.get_string("scenario", "simple")));
  c.landmarks = static_cast<int>(kv.get_int("L", kv.get_int("landmarks", c.landmarks)));
  c.vocabulary = static_cast<int>(kv.get_int("K", kv.get_int("vocabulary", c.vocabulary)));
  c.obstacles = static_cast<int>(kv.get_int("M", kv.get_int("obstacles", c.obstacles)));
  c.episode_length = static_cast<int>(kv.get_int("T", kv.get_int("episode_length", c.episode_length)));
  c.dt = kv.get_double("dt", c.dt);
  c.force = kv.get_double("F", kv.get_double("force", c.force));
  c.damping = kv.get_double("damping", c.damping);
  c.mass = kv.get_double("mass", c.mass);
  c.collision_radius = kv.get_double("collision_radius", c.collision_radius);
  c.penalty = kv.get_double("penalty", c.penalty);
  c.arena_half_width = kv.get_double("arena_half_width", c.arena_half_width);
  c.force_lag = kv.get_bool("force_lag", c.force_lag);
  c.observe_acceleration = kv.get_bool("observe_acceleration", c.observe_acceleration);
  c.validate();
  return c;
}

std::map<std::string, std::string> ScenarioConfig::to_meta() const {
  auto num = [](double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return std::string(buf);
  };
  return {
      {"scenario", std::string(ScenarioName(scenario))},
      {"L", std::to_string(landmarks)},
      {"K", std::to_string(vocabulary)},
      {"M", std::to_string(obstacles)},
      {"T", std::to_string(episode_length)},
      {"dt", num(dt)},
      {"F", num(force)},
      {"damping", num(damping)},
      {"mass", num(mass)},
      {"collision_radius", num(collision_radius)},
      {"penalty", num(penalty)},
      {"arena_half_width", num(arena_half_width)},
      {"force_lag", force_lag ? "true" : "false"},
      {"observe_acceleration", observe_acceleration ? "true" : "false"},
  };
}

ScenarioConfig ScenarioConfig::FromMeta(const std::map<std::string, std::string>& meta) {
  KeyValueConfig kv;
  for (const auto& [k, v] : meta) kv.set(k, v);
  return FromKeyValues(kv);
}

void ScenarioConfig::validate() const {
  Require(landmarks >= 1, "scenario needs at least one landmark");
  Require(vocabulary >= 1, "vocabulary size must be positive");
  Require(obstacles >= 0, "obstacle count must be non-negative");
  Require(episode_length >= 1, "episode length T must be >= 1");
  Require(dt > 0.0, "dt must be positive");
  Require(mass > 0.0, "mass must be positive");
  Require(collision_radius >= 0.0, "collision radius must be non-negative");
  Require(arena_half_width > 0.0, "arena half-width must be positive");
}

WorldState Reset(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> coord(-config.arena_half_width, config.arena_half_width);
  auto point = [&] {
    const double x = coord(rng);
    const double y = coord(rng);
    return Vec2(x, y);
  };
  WorldState s;
  for (int i = 0; i < config.landmarks; ++i) s.landmarks.push_back(point());
  for (int i = 0; i < config.obstacles; ++i) s.obstacles.push_back(point());
  s.position = point();
  s.target = std::uniform_int_distribution<int>(0, config.landmarks - 1)(rng);
  return s;
}

Vec2 ListenerForce(int move_index, double force) {
  switch (move_index) {
    case 0:
      return Vec2::Zero();
    case 1:
      return Vec2(force, 0.0);
    case 2:
      return Vec2(-force, 0.0);
    case 3:
      return Vec2(0.0, force);
    case 4:
      return Vec2(0.0, -force);
    default:
      throw ContractViolation("listener action index " + std::to_string(move_index) + " outside [0, 5)");
  }
}

std::vector<bool> IsCollision(const WorldState& state, const ScenarioConfig& config) {
  std::vector<bool> hits;
  hits.reserve(state.obstacles.size());
  for (const Vec2& o : state.obstacles) hits.push_back((state.position - o).norm() < config.collision_radius);
  return hits;
}

bool AnyCollision(const WorldState& state, const ScenarioConfig& config) {
  for (const Vec2& o : state.obstacles) {
    if ((state.position - o).norm() < config.collision_radius) return true;
  }
  return false;
}

StepResult Step(const WorldState& state, const JointAction& action, const ScenarioConfig& config) {
  Require(state.t < config.episode_length, "step called after the episode ended (t = " +
                                               std::to_string(state.t) + ", T = " +
                                               std::to_string(config.episode_length) + ")");
  Require(action.message.size() == config.vocabulary, "speaker action has the wrong vocabulary size");
  Require(action.move.size() == kListenerActions, "listener action must be a 5-way one-hot");
  StepResult r;
  WorldState& next = r.state;
  next = state;
  next.position = state.position + state.velocity * config.dt;
  const Vec2 accel = ListenerForce(action.move.index(), config.force) / config.mass;
  next.velocity = config.damping * state.velocity + (config.force_lag ? state.acceleration : accel) * config.dt;
  next.acceleration = accel;
  next.message = action.message;
  next.t = state.t + 1;
  r.collision = AnyCollision(next, config);
  r.reward = -next.target_distance() - (r.collision ? config.penalty : 0.0);
  return r;
}

int SpeakerObsDim(const ScenarioConfig& config) {
  switch (config.scenario) {
    case Scenario::kSimple:
      return config.landmarks;
    case Scenario::kChallenging:
      return 4;
    case Scenario::kHard:
      return 4 + 2 * config.obstacles;
  }
  return 0;
}

int ListenerObsDim(const ScenarioConfig& config) {
  switch (config.scenario) {
    case Scenario::kSimple:
    case Scenario::kChallenging:
      return 2 + 2 * config.landmarks + config.vocabulary + (config.observe_acceleration ? 2 : 0);
    case Scenario::kHard:
      return 2 + config.vocabulary + (config.observe_acceleration ? 2 : 0);
  }
  return 0;
}

int MessageOffset(const ScenarioConfig& config) {
  return config.scenario == Scenario::kHard ? 2 : 2 + 2 * config.landmarks;
}

int ActionDim(const ScenarioConfig& config, int agent) {
  Require(agent == kSpeaker || agent == kListener, "agent index out of range");
  return agent == kSpeaker ? config.vocabulary : kListenerActions;
}

int ObsDim(const ScenarioConfig& config, int agent) {
  Require(agent == kSpeaker || agent == kListener, "agent index out of range");
  return agent == kSpeaker ? SpeakerObsDim(config) : ListenerObsDim(config);
}

JointObservation Observe(const WorldState& state, const ScenarioConfig& config) {
  JointObservation o;
  o.speaker = Vector::Zero(SpeakerObsDim(config));
  o.listener = Vector::Zero(ListenerObsDim(config));
  const Vec2& goal = state.target_position();
  switch (config.scenario) {
    case Scenario::kSimple:
      o.speaker(state.target) = 1.0;
      break;
    case Scenario::kChallenging:
      o.speaker.segment<2>(0) = goal;
      o.speaker.segment<2>(2) = state.position;
      break;
    case Scenario::kHard:
      o.speaker.segment<2>(0) = goal;
      o.speaker.segment<2>(2) = state.position;
      for (std::size_t j = 0; j < state.obstacles.size(); ++j) {
        o.speaker.segment<2>(4 + 2 * static_cast<Eigen::Index>(j)) = state.obstacles[j] - state.position;
      }
      break;
  }
  o.listener.segment<2>(0) = state.velocity;
  if (config.scenario != Scenario::kHard) {
    for (std::size_t l = 0; l < state.landmarks.size(); ++l) {
      o.listener.segment<2>(2 + 2 * static_cast<Eigen::Index>(l)) = state.landmarks[l] - state.position;
    }
  }
  if (state.message) {
    Require(state.message->size() == config.vocabulary, "stored message has the wrong vocabulary size");
    o.listener(MessageOffset(config) + state.message->index()) = 1.0;
  }
  if (config.observe_acceleration) o.listener.tail<2>() = state.acceleration;
  return o;
}

void WriteTrajectoryCsv(std::ostream& out, std::span<const TrajectoryRow> rows) {
  const auto old_precision = out.precision(12);
  out << "t,p1_x,p1_y,v1_x,v1_y,message_index,listener_action_index,reward,collision_flag\n";
  for (const TrajectoryRow& r : rows) {
    out << r.t << ',' << r.position.x() << ',' << r.position.y() << ',' << r.velocity.x() << ','
        << r.velocity.y() << ',' << r.message_index << ',' << r.listener_action << ',' << r.reward << ','
        << (r.collision ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace temarl::env
