// Command-line driver: train, eval, probe, histogram.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "temarl/errors.h"
#include "temarl/harness.h"
#include "temarl/kv_config.h"
#include "temarl/trainer.h"

namespace {

// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void WithOutput(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw temarl::ContractViolation("cannot write '" + path + "'");
  fn(out);
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // The estimator allocates multi-megabyte temporaries every update; keep them
  // on the heap instead of mapping and unmapping pages each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Speaker-listener MARL with transfer-empowerment rewards"};
  app.require_subcommand(1);

  std::string config_path, method, scenario, seeds, out_dir;
  std::vector<std::string> overrides;
  int episodes = 0;
  auto* train = app.add_subcommand("train", "Train one run per seed");
  train->add_option("--config", config_path, "Key-value config file")->check(CLI::ExistingFile);
  train->add_option("--method", method, "baseline | empowerment | social_influence")
      ->check(CLI::IsMember({"baseline", "empowerment", "social_influence"}));
  train->add_option("--scenario", scenario, "simple | challenging | hard")
      ->check(CLI::IsMember({"simple", "challenging", "hard"}));
  train->add_option("--seeds", seeds, "Comma-separated seeds, e.g. 0,1,2");
  train->add_option("--episodes", episodes, "Override the episode count");
  train->add_option("--out", out_dir, "Output directory");
  train->add_option("--set", overrides, "Extra key=value overrides")->take_all();

  std::string checkpoint, output;
  int eval_episodes = 100;
  std::string per_episode;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--output", output, "CSV path (default stdout)");
  eval->add_option("--per-episode", per_episode, "Also write per-episode rows to this CSV");

  int message = 0, steps = 10;
  auto* probe = app.add_subcommand("probe", "Roll the listener with one fixed message");
  probe->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  probe->add_option("--message", message)->required();
  probe->add_option("--steps", steps)->check(CLI::PositiveNumber);
  probe->add_option("--output", output, "CSV path (default stdout)");

  int hist_episodes = 100;
  auto* hist = app.add_subcommand("histogram", "Listener action counts per greedy episode");
  hist->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  hist->add_option("--episodes", hist_episodes)->check(CLI::PositiveNumber);
  hist->add_option("--output", output, "CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      temarl::KeyValueConfig kv;
      if (!config_path.empty()) kv = temarl::KeyValueConfig::Load(config_path);
      for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw temarl::ContractViolation("--set expects key=value, got '" + o + "'");
        kv.set(o.substr(0, eq), o.substr(eq + 1));
      }
      if (!method.empty()) kv.set("method", method);
      if (!scenario.empty()) kv.set("scenario", scenario);
      if (!seeds.empty()) kv.set("seeds", seeds);
      if (episodes > 0) kv.set("episodes", std::to_string(episodes));
      if (!out_dir.empty()) kv.set("out_dir", out_dir);
      const temarl::ExperimentConfig cfg = temarl::ExperimentConfig::FromKeyValues(kv);
      const auto runs = temarl::Run(cfg);
      int failed = 0;
      std::cout << "seed,status,curve_csv,checkpoint\n";
      for (const auto& r : runs) {
        std::cout << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << r.curve_csv << ',' << r.checkpoint << '\n';
        if (!r.ok) {
          std::cerr << "seed " << r.seed << " failed: " << r.error << '\n';
          ++failed;
        }
      }
      return failed == 0 ? 0 : 1;
    }
    const temarl::PolicySet policies = temarl::LoadPolicies(checkpoint);
    if (*eval) {
      const temarl::EvalReport rep = temarl::Evaluate(policies, eval_episodes);
      WithOutput(output, [&](std::ostream& out) { temarl::WriteEvalCsv(out, rep); });
      if (!per_episode.empty()) {
        WithOutput(per_episode, [&](std::ostream& out) { temarl::WriteEvalEpisodesCsv(out, rep); });
      }
    } else if (*probe) {
      const auto rows = temarl::FixedMessageProbe(policies, message, steps);
      WithOutput(output, [&](std::ostream& out) { temarl::env::WriteTrajectoryCsv(out, rows); });
    } else if (*hist) {
      const auto counts = temarl::ActionHistogram(policies, hist_episodes);
      WithOutput(output, [&](std::ostream& out) { temarl::WriteHistogramCsv(out, counts); });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
