#ifndef TEMARL_HARNESS_H_
#define TEMARL_HARNESS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "temarl/particle_env.h"
#include "temarl/trainer.h"

namespace temarl {

struct ExperimentConfig {
  TrainerConfig trainer;  // its seed is replaced per run
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  int eval_episodes = 100;
  std::string out_dir = ".";
  int workers = 0;  // concurrent seeds; 0 = one per hardware thread

  static ExperimentConfig FromKeyValues(const KeyValueConfig& kv);
  void validate() const;
};

struct SeedRun {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string curve_csv;
  std::string checkpoint;  // final checkpoint
};

// "{scenario}_{method}_{seed}"
std::string RunName(const TrainerConfig& config);

// Trains every seed (concurrently, independent state), writing per-seed
// learning-curve CSVs, checkpoints and a run log into out_dir, then the
// seed-averaged summary CSV. A failing seed is logged and skipped.
std::vector<SeedRun> Run(const ExperimentConfig& config);

void WriteCurveHeader(std::ostream& out, bool with_influence);
void WriteCurveRow(std::ostream& out, const EpisodeMetrics& m, bool with_influence);

// Pointwise mean of equally long learning curves read from CSV files.
void WriteSummaryCsv(const std::vector<std::string>& curve_csvs, const std::string& path);

struct EpisodeEval {
  double mean_distance = 0.0;
  double hit_rate = 0.0;  // fraction of timesteps in collision
  bool any_hit = false;
};

struct EvalReport {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  double average_distance = 0.0;  // over all timesteps of all episodes
  double hit_rate = 0.0;          // fraction of timesteps with a collision
  double episode_hit_rate = 0.0;  // fraction of episodes with any collision
  std::vector<EpisodeEval> episodes;
};

// Greedy rollouts; never modifies the policies. `eval_seed` picks the
// evaluation layouts.
EvalReport Evaluate(const PolicySet& policies, int episodes, std::uint64_t eval_seed = 1000003);

void WriteEvalCsv(std::ostream& out, const EvalReport& report);
void WriteEvalEpisodesCsv(std::ostream& out, const EvalReport& report);

// counts[e][a]: how often the listener chose action a in greedy episode e.
std::vector<std::vector<int>> ActionHistogram(const PolicySet& policies, int episodes,
                                              std::uint64_t eval_seed = 1000003);
void WriteHistogramCsv(std::ostream& out, const std::vector<std::vector<int>>& counts);

// Listener alone, starting at rest at the origin, fed the same one-hot
// message on every step.
std::vector<env::TrajectoryRow> FixedMessageProbe(const PolicySet& policies, int message, int steps = 10);

struct ProbeSummary {
  std::vector<env::Vec2> displacement;  // per symbol, final minus start
  int distinct_directions = 0;  // largest set of moving symbols pairwise > min_angle apart
  int still_symbols = 0;        // symbols with displacement below still_threshold
};

ProbeSummary SummarizeProbes(const PolicySet& policies, int steps = 10, double min_angle_deg = 30.0,
                             double still_threshold = 0.05);

}  // namespace temarl

#endif  // TEMARL_HARNESS_H_
