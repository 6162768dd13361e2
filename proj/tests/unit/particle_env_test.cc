#include "temarl/particle_env.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "temarl/errors.h"
#include "temarl/kv_config.h"

namespace temarl::env {
namespace {

JointAction Act(const ScenarioConfig& c, int message, int move) {
  return JointAction{OneHot(c.vocabulary, message), OneHot(kListenerActions, move)};
}

WorldState Placed(const ScenarioConfig& c) {
  WorldState s = Reset(c, 0);
  s.position = Vec2::Zero();
  s.velocity = Vec2::Zero();
  s.acceleration = Vec2::Zero();
  return s;
}

TEST(ScenarioConfig, PresetsAndOverrides) {
  const ScenarioConfig simple = ScenarioConfig::For(Scenario::kSimple);
  EXPECT_EQ(simple.landmarks, 3);
  EXPECT_EQ(simple.vocabulary, 3);
  EXPECT_EQ(simple.obstacles, 0);
  EXPECT_EQ(simple.episode_length, 25);
  EXPECT_EQ(simple.dt, 0.1);
  EXPECT_EQ(simple.damping, 0.5);
  EXPECT_EQ(simple.mass, 1.0);
  const ScenarioConfig hard = ScenarioConfig::For(Scenario::kHard);
  EXPECT_EQ(hard.landmarks, 6);
  EXPECT_EQ(hard.vocabulary, 5);
  EXPECT_EQ(hard.obstacles, 6);
  std::stringstream in("scenario = challenging\nT = 100\nF = 5\n");
  const ScenarioConfig c = ScenarioConfig::FromKeyValues(KeyValueConfig::Parse(in));
  EXPECT_EQ(c.scenario, Scenario::kChallenging);
  EXPECT_EQ(c.episode_length, 100);
  EXPECT_EQ(c.force, 5.0);
  EXPECT_EQ(ScenarioConfig::FromMeta(c.to_meta()).force, 5.0);
  EXPECT_FALSE(c.force_lag);
  EXPECT_THROW(ParseScenario("medium"), ContractViolation);
  std::stringstream flags("force_lag = true\nobserve_acceleration = true\n");
  const ScenarioConfig f = ScenarioConfig::FromMeta(ScenarioConfig::FromKeyValues(KeyValueConfig::Parse(flags)).to_meta());
  EXPECT_TRUE(f.force_lag);
  EXPECT_TRUE(f.observe_acceleration);
}

TEST(Reset, DeterministicAndScenarioSized) {
  const ScenarioConfig hard = ScenarioConfig::For(Scenario::kHard);
  const WorldState a = Reset(hard, 12), b = Reset(hard, 12), c = Reset(hard, 13);
  EXPECT_EQ(a.landmarks, b.landmarks);
  EXPECT_EQ(a.obstacles, b.obstacles);
  EXPECT_EQ(a.position, b.position);
  EXPECT_EQ(a.target, b.target);
  EXPECT_NE(a.position, c.position);
  EXPECT_EQ(a.landmarks.size(), 6u);
  EXPECT_EQ(a.obstacles.size(), 6u);
  EXPECT_EQ(Reset(ScenarioConfig::For(Scenario::kSimple), 1).obstacles.size(), 0u);
  EXPECT_FALSE(a.message.has_value());
  EXPECT_EQ(a.velocity, Vec2::Zero());
}

TEST(Reset, PositionsAreUniformInArena) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  double sum = 0.0, sq = 0.0;
  const int n = 4000;
  for (int s = 0; s < n; ++s) {
    const WorldState w = Reset(c, static_cast<std::uint64_t>(s));
    for (const Vec2& l : w.landmarks) {
      EXPECT_LE(l.cwiseAbs().maxCoeff(), 1.0);
      sum += l.x();
      sq += l.x() * l.x();
    }
  }
  const double m = sum / (3 * n);
  EXPECT_NEAR(m, 0.0, 4.0 * std::sqrt(1.0 / 3.0 / (3 * n)));
  EXPECT_NEAR(sq / (3 * n), 1.0 / 3.0, 0.02);
}

TEST(Step, KinematicsUseValuesFromTimeT) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  WorldState s = Placed(c);
  s.velocity = Vec2(1.0, 0.0);
  const StepResult r = Step(s, Act(c, 0, kWaitAction), c);
  EXPECT_EQ(r.state.position, Vec2(0.1, 0.0));
  EXPECT_EQ(r.state.velocity, Vec2(0.5, 0.0));
  EXPECT_EQ(r.state.acceleration, Vec2::Zero());
  EXPECT_EQ(r.state.t, 1);
}

TEST(Step, ForceReachesVelocityAtOnceAndPositionNextStep) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  WorldState s = Placed(c);
  s = Step(s, Act(c, 0, 1), c).state;
  EXPECT_EQ(s.acceleration, Vec2(c.force, 0.0));
  EXPECT_EQ(s.velocity, Vec2(c.force * c.dt, 0.0));
  EXPECT_EQ(s.position, Vec2::Zero());
  s = Step(s, Act(c, 0, kWaitAction), c).state;
  EXPECT_EQ(s.position, Vec2(c.force * c.dt * c.dt, 0.0));
  EXPECT_EQ(s.velocity, Vec2(c.damping * c.force * c.dt, 0.0));
}

TEST(Step, LaggedForceReachesPositionTwoStepsLater) {
  ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  c.force_lag = true;
  WorldState s = Placed(c);
  s = Step(s, Act(c, 0, 1), c).state;
  EXPECT_EQ(s.acceleration, Vec2(c.force, 0.0));
  EXPECT_EQ(s.velocity, Vec2::Zero());
  s = Step(s, Act(c, 0, kWaitAction), c).state;
  EXPECT_EQ(s.velocity, Vec2(c.force * c.dt, 0.0));
  EXPECT_EQ(s.position, Vec2::Zero());
  s = Step(s, Act(c, 0, kWaitAction), c).state;
  EXPECT_EQ(s.position, Vec2(c.force * c.dt * c.dt, 0.0));
}

TEST(Step, RestStateStaysAtRest) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  const WorldState s = Placed(c);
  const StepResult r = Step(s, Act(c, 1, kWaitAction), c);
  EXPECT_EQ(r.state.position, s.position);
  EXPECT_EQ(r.state.velocity, Vec2::Zero());
}

TEST(Step, SpeedHalvesEachStepWithoutForce) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  WorldState s = Placed(c);
  s.velocity = Vec2(0.0, 2.0);
  for (int t = 0; t < 10; ++t) {
    const double before = s.velocity.norm();
    s = Step(s, Act(c, 0, kWaitAction), c).state;
    EXPECT_EQ(s.velocity.norm(), 0.5 * before);
  }
}

TEST(Step, ActionMapAndForceMagnitude) {
  EXPECT_EQ(ListenerForce(0, 5.0), Vec2(0.0, 0.0));
  EXPECT_EQ(ListenerForce(1, 5.0), Vec2(5.0, 0.0));
  EXPECT_EQ(ListenerForce(2, 5.0), Vec2(-5.0, 0.0));
  EXPECT_EQ(ListenerForce(3, 5.0), Vec2(0.0, 5.0));
  EXPECT_EQ(ListenerForce(4, 5.0), Vec2(0.0, -5.0));
  EXPECT_THROW(ListenerForce(5, 5.0), ContractViolation);
}

TEST(Step, RewardIsNegativeDistanceToTarget) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  WorldState s = Placed(c);
  s.landmarks[static_cast<std::size_t>(s.target)] = Vec2::Zero();
  EXPECT_EQ(Step(s, Act(c, 0, 0), c).reward, 0.0);
  s.landmarks[static_cast<std::size_t>(s.target)] = Vec2(0.3, 0.4);
  EXPECT_DOUBLE_EQ(Step(s, Act(c, 0, 0), c).reward, -0.5);
}

TEST(Step, CollisionPenaltyUsesStrictThreshold) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kHard);
  WorldState s = Placed(c);
  s.landmarks[static_cast<std::size_t>(s.target)] = Vec2(1.0, 0.0);
  for (auto& o : s.obstacles) o = Vec2(50.0, 50.0);
  s.obstacles[0] = Vec2(0.0, 0.149);
  StepResult r = Step(s, Act(c, 0, 0), c);
  EXPECT_TRUE(r.collision);
  EXPECT_EQ(r.reward, -2.0);
  s.obstacles[0] = Vec2(0.0, 0.151);
  r = Step(s, Act(c, 0, 0), c);
  EXPECT_FALSE(r.collision);
  EXPECT_EQ(r.reward, -1.0);
  s.obstacles[0] = Vec2(0.0, 0.15);
  EXPECT_FALSE(IsCollision(s, c)[0]);
  s.obstacles[0] = Vec2(0.0, 0.14);
  EXPECT_EQ(Step(s, Act(c, 0, 0), c).reward, -2.0);
}

TEST(Step, StopsAfterEpisodeLength) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  WorldState s = Reset(c, 3);
  for (int t = 0; t < c.episode_length; ++t) s = Step(s, Act(c, 0, 1), c).state;
  EXPECT_EQ(s.t, 25);
  EXPECT_THROW(Step(s, Act(c, 0, 1), c), ContractViolation);
}

TEST(Step, RewardNeverPositive) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kHard);
  Rng rng(5);
  for (std::uint64_t e = 0; e < 50; ++e) {
    WorldState s = Reset(c, e);
    for (int t = 0; t < c.episode_length; ++t) {
      const StepResult r = Step(s, Act(c, static_cast<int>(rng() % 5), static_cast<int>(rng() % 5)), c);
      EXPECT_LE(r.reward, 0.0);
      s = r.state;
    }
  }
}

TEST(Observe, LayoutsPerScenario) {
  const ScenarioConfig simple = ScenarioConfig::For(Scenario::kSimple);
  const ScenarioConfig chall = ScenarioConfig::For(Scenario::kChallenging);
  const ScenarioConfig hard = ScenarioConfig::For(Scenario::kHard);
  EXPECT_EQ(SpeakerObsDim(simple), 3);
  EXPECT_EQ(ListenerObsDim(simple), 11);
  EXPECT_EQ(SpeakerObsDim(chall), 4);
  EXPECT_EQ(ListenerObsDim(chall), 19);
  EXPECT_EQ(SpeakerObsDim(hard), 16);
  EXPECT_EQ(ListenerObsDim(hard), 7);

  WorldState s = Reset(simple, 9);
  s.position = s.landmarks[1];
  const JointObservation o = Observe(s, simple);
  EXPECT_EQ(o.speaker, Vector::Unit(3, s.target));
  EXPECT_EQ(o.listener.segment<2>(4), Vector::Zero(2));
  EXPECT_EQ(o.listener.tail(3), Vector::Zero(3));

  WorldState h = Reset(hard, 4);
  h.velocity = Vec2(0.25, -0.5);
  const JointObservation oh = Observe(h, hard);
  EXPECT_EQ(oh.listener.head<2>(), Vector(h.velocity));
  EXPECT_EQ(oh.listener.tail(5), Vector::Zero(5));
  EXPECT_EQ(oh.speaker.segment<2>(0), Vector(h.target_position()));
  EXPECT_EQ(oh.speaker.segment<2>(2), Vector(h.position));
  EXPECT_EQ(oh.speaker.segment<2>(4), Vector(h.obstacles[0] - h.position));
}

TEST(Observe, OptionalAccelerationFollowsMessage) {
  ScenarioConfig hard = ScenarioConfig::For(Scenario::kHard);
  hard.observe_acceleration = true;
  EXPECT_EQ(ListenerObsDim(hard), 9);
  WorldState s = Reset(hard, 2);
  s = Step(s, Act(hard, 3, 4), hard).state;
  const JointObservation o = Observe(s, hard);
  EXPECT_EQ(o.listener.segment(MessageOffset(hard), 5), Vector::Unit(5, 3));
  EXPECT_EQ(o.listener.tail<2>(), Vector(Vec2(0.0, -hard.force)));
}

TEST(Observe, MessageAppearsOneStepLater) {
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kChallenging);
  WorldState s = Reset(c, 1);
  for (int m = 0; m < c.vocabulary; ++m) {
    s = Step(s, Act(c, m, 0), c).state;
    const JointObservation o = Observe(s, c);
    EXPECT_EQ(o.listener.segment(MessageOffset(c), c.vocabulary), Vector::Unit(c.vocabulary, m));
  }
}

TEST(Evaluation, RandomListenerDistanceIsOrderOne) {
  // Monte-Carlo over uniformly random actions; mean distance over all steps.
  const ScenarioConfig c = ScenarioConfig::For(Scenario::kSimple);
  Rng rng(11);
  double total = 0.0;
  int n = 0;
  for (std::uint64_t e = 0; e < 100; ++e) {
    WorldState s = Reset(c, 1000 + e);
    for (int t = 0; t < c.episode_length; ++t) {
      s = Step(s, Act(c, static_cast<int>(rng() % 3), static_cast<int>(rng() % 5)), c).state;
      total += s.target_distance();
      ++n;
    }
  }
  const double avg = total / n;
  EXPECT_GE(avg, 0.5);
  EXPECT_LE(avg, 1.5);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  std::vector<TrajectoryRow> rows(2);
  rows[1].t = 1;
  rows[1].position = Vec2(0.5, -0.25);
  rows[1].message_index = 2;
  rows[1].collision = true;
  std::stringstream out;
  WriteTrajectoryCsv(out, rows);
  std::string header, first, second;
  std::getline(out, header);
  std::getline(out, first);
  std::getline(out, second);
  EXPECT_EQ(header, "t,p1_x,p1_y,v1_x,v1_y,message_index,listener_action_index,reward,collision_flag");
  EXPECT_EQ(second, "1,0.5,-0.25,0,0,2,0,0,1");
}

}  // namespace
}  // namespace temarl::env
