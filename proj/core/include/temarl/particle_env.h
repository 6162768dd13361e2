#ifndef TEMARL_PARTICLE_ENV_H_
#define TEMARL_PARTICLE_ENV_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "temarl/autodiff.h"
#include "temarl/gumbel.h"

namespace temarl {
class KeyValueConfig;
}

namespace temarl::env {

// Cooperative speaker-listener world on the plane. Agent 0 is a disembodied
// speaker emitting one of K symbols; agent 1 is a point-mass listener with five
// discrete force actions.
enum class Scenario { kSimple, kChallenging, kHard };

std::string_view ScenarioName(Scenario s);
Scenario ParseScenario(std::string_view name);

inline constexpr int kSpeaker = 0;
inline constexpr int kListener = 1;
inline constexpr int kNumAgents = 2;
inline constexpr int kListenerActions = 5;
inline constexpr int kWaitAction = 0;

struct ScenarioConfig {
  Scenario scenario = Scenario::kSimple;
  int landmarks = 3;   // L
  int vocabulary = 3;  // K
  int obstacles = 0;   // M
  int episode_length = 25;
  double collision_radius = 0.15;
  double penalty = 1.0;
  double dt = 0.1;
  double damping = 0.5;
  double mass = 1.0;
  double arena_half_width = 1.0;
  double force = 15.0;
  // false: v <- damping v + (u / mass) dt with the current action's force.
  // true: the update uses the acceleration stored at time t instead, so a
  // force first moves the listener two steps after it is chosen.
  bool force_lag = false;
  // Appends the stored acceleration to the listener's observation.
  bool observe_acceleration = false;

  static ScenarioConfig For(Scenario s);
  // Reads scenario, L, K, M, T, dt, F (and the longer key spellings) on top of
  // the scenario defaults.
  static ScenarioConfig FromKeyValues(const KeyValueConfig& kv);
  std::map<std::string, std::string> to_meta() const;
  static ScenarioConfig FromMeta(const std::map<std::string, std::string>& meta);

  void validate() const;
};

using Vec2 = Eigen::Vector2d;

struct WorldState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Vec2 acceleration = Vec2::Zero();
  std::optional<OneHot> message;  // empty until the speaker has spoken
  int target = 0;
  std::vector<Vec2> landmarks;
  std::vector<Vec2> obstacles;
  int t = 0;

  const Vec2& target_position() const { return landmarks.at(static_cast<std::size_t>(target)); }
  double target_distance() const { return (position - target_position()).norm(); }
};

struct JointAction {
  OneHot message;  // speaker, size K
  OneHot move;     // listener, size 5
};

struct JointObservation {
  Vector speaker;
  Vector listener;
};

struct StepResult {
  WorldState state;
  double reward = 0.0;
  bool collision = false;
};

WorldState Reset(const ScenarioConfig& config, std::uint64_t seed);

// Advances one tick:
//   p <- p + v dt,  v <- damping v + a dt,  a <- u / mass
// with all right-hand sides taken at time t. The reward is the negative
// distance from the new position to the target, minus the penalty when any
// obstacle is strictly closer than the collision radius.
StepResult Step(const WorldState& state, const JointAction& action, const ScenarioConfig& config);

JointObservation Observe(const WorldState& state, const ScenarioConfig& config);

// One flag per obstacle: distance < collision radius (strict).
std::vector<bool> IsCollision(const WorldState& state, const ScenarioConfig& config);
bool AnyCollision(const WorldState& state, const ScenarioConfig& config);

// Index 0 waits; 1-4 push +x, -x, +y, -y with the configured magnitude.
Vec2 ListenerForce(int move_index, double force);

int SpeakerObsDim(const ScenarioConfig& config);
int ListenerObsDim(const ScenarioConfig& config);
int ActionDim(const ScenarioConfig& config, int agent);
int ObsDim(const ScenarioConfig& config, int agent);
// Offset of the message one-hot inside the listener observation.
int MessageOffset(const ScenarioConfig& config);

struct TrajectoryRow {
  int t = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  int message_index = -1;  // -1 before the first message
  int listener_action = 0;
  double reward = 0.0;
  bool collision = false;
};

void WriteTrajectoryCsv(std::ostream& out, std::span<const TrajectoryRow> rows);

}  // namespace temarl::env

#endif  // TEMARL_PARTICLE_ENV_H_
