#include "temarl/harness.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "temarl/errors.h"

namespace temarl {
namespace {

namespace fs = std::filesystem;

// Hard-scenario pair whose listener maps message m straight to move m,
// ignoring its velocity.
PolicySet MessageFollower() {
  PolicySet p;
  p.scenario = env::ScenarioConfig::For(env::Scenario::kHard);
  p.method = "baseline";
  const int obs = env::ObsDim(p.scenario, env::kListener);
  const int k = p.scenario.vocabulary;
  Rng rng(1);
  p.actors.emplace_back("speaker", std::vector<int>{env::ObsDim(p.scenario, env::kSpeaker), 8, k},
                        Activation::kRelu, Activation::kIdentity, rng);
  Matrix w = Matrix::Zero(obs, env::kListenerActions);
  w.bottomRows(k) = Matrix::Identity(k, env::kListenerActions) * 10.0;
  p.actors.emplace_back("listener", std::vector<DenseLayer>{{{"w", w},
                                                             {"b", Matrix::Zero(1, env::kListenerActions)},
                                                             Activation::kIdentity}});
  return p;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(FixedMessageProbe, FollowsTheMappedMove) {
  const PolicySet p = MessageFollower();
  const auto still = FixedMessageProbe(p, 0, 10);
  ASSERT_EQ(still.size(), 11u);
  EXPECT_EQ(still.back().position, env::Vec2::Zero());
  const auto right = FixedMessageProbe(p, 1, 10);
  EXPECT_GT(right.back().position.x(), 0.5);
  EXPECT_EQ(right.back().position.y(), 0.0);
  for (const auto& row : right) {
    if (row.t > 0) EXPECT_EQ(row.listener_action, 1);
  }
  EXPECT_THROW(FixedMessageProbe(p, 5), ContractViolation);
}

TEST(SummarizeProbes, CountsDirectionsAndStillSymbols) {
  const ProbeSummary s = SummarizeProbes(MessageFollower());
  EXPECT_EQ(s.displacement.size(), 5u);
  EXPECT_EQ(s.still_symbols, 1);
  EXPECT_EQ(s.distinct_directions, 4);
  // A 90 degree threshold leaves only the two antiparallel pairs apart.
  EXPECT_EQ(SummarizeProbes(MessageFollower(), 10, 91.0).distinct_directions, 2);
}

TEST(Evaluate, DeterministicAndLeavesPoliciesAlone) {
  const PolicySet p = MessageFollower();
  const Matrix before = p.actors[0].layer(0).weight.value;
  const EvalReport a = Evaluate(p, 5), b = Evaluate(p, 5);
  EXPECT_EQ(a.average_distance, b.average_distance);
  EXPECT_EQ(p.actors[0].layer(0).weight.value, before);
  ASSERT_EQ(a.episodes.size(), 5u);
  double mean = 0.0;
  for (const EpisodeEval& e : a.episodes) {
    mean += e.mean_distance / 5.0;
    EXPECT_GE(e.hit_rate, 0.0);
    EXPECT_LE(e.hit_rate, 1.0);
    EXPECT_EQ(e.any_hit, e.hit_rate > 0.0);
  }
  EXPECT_NEAR(a.average_distance, mean, 1e-12);
  EXPECT_NE(Evaluate(p, 5, 99).average_distance, a.average_distance);

  std::ostringstream csv;
  WriteEvalCsv(csv, a);
  const auto lines = Lines(csv.str());
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "scenario,method,seed,episodes,average_distance,obstacle_hit_rate,episode_hit_rate");
  EXPECT_EQ(lines[1].rfind("hard,baseline,0,5,", 0), 0u);
}

TEST(Evaluate, RejectsMismatchedActors) {
  PolicySet p = MessageFollower();
  p.scenario = env::ScenarioConfig::For(env::Scenario::kSimple);
  EXPECT_THROW(Evaluate(p, 1), ContractViolation);
}

TEST(ActionHistogram, CountsEveryStep) {
  const auto counts = ActionHistogram(MessageFollower(), 3);
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& c : counts) {
    int total = 0;
    for (int x : c) total += x;
    EXPECT_EQ(total, 25);
  }
  std::ostringstream csv;
  WriteHistogramCsv(csv, counts);
  EXPECT_EQ(Lines(csv.str()).front(), "episode,action_0,action_1,action_2,action_3,action_4");
  EXPECT_EQ(Lines(csv.str()).size(), 4u);
}

TEST(Run, WritesCurvesCheckpointsAndSummary) {
  const fs::path dir = fs::temp_directory_path() / "temarl_harness_test";
  fs::remove_all(dir);
  ExperimentConfig c;
  c.trainer.scenario = env::ScenarioConfig::For(env::Scenario::kSimple);
  c.trainer.method = Method::kSocialInfluence;
  c.trainer.episodes = 4;
  c.trainer.batch_size = 16;
  c.trainer.warmup = 32;
  c.trainer.maddpg.hidden = 8;
  c.trainer.transition.hidden = 8;
  c.trainer.checkpoint_every = 2;
  c.seeds = {3, 4};
  c.out_dir = dir.string();
  c.workers = 1;
  const auto runs = temarl::Run(c);
  ASSERT_EQ(runs.size(), 2u);
  for (const SeedRun& r : runs) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_TRUE(fs::exists(r.checkpoint));
    std::ifstream in(r.curve_csv);
    std::stringstream text;
    text << in.rdbuf();
    const auto lines = Lines(text.str());
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0],
              "episode,mean_step_reward,mean_distance,collision_rate,empowerment_bound,social_influence,wall_clock_s");
  }
  EXPECT_TRUE(fs::exists(dir / "simple_social_influence_3_ep2.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "simple_social_influence_summary.csv"));
  EXPECT_EQ(LoadPolicies(runs[0].checkpoint).seed, 3u);
  fs::remove_all(dir);
}

TEST(WriteSummaryCsv, AveragesPointwise) {
  const fs::path dir = fs::temp_directory_path() / "temarl_summary_test";
  fs::create_directories(dir);
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string(), out = (dir / "s.csv").string();
  std::ofstream(a) << "x,y\n1,2\n3,4\n";
  std::ofstream(b) << "x,y\n3,0\n5,8\n";
  WriteSummaryCsv({a, b}, out);
  std::ifstream in(out);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), "x,y\n2,1\n4,6\n");
  std::ofstream(b) << "x,y\n3,0\n";
  EXPECT_THROW(WriteSummaryCsv({a, b}, out), ContractViolation);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace temarl
