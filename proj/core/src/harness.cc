#include "temarl/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "temarl/errors.h"
#include "temarl/kv_config.h"
#include "temarl/maddpg.h"

namespace temarl {

namespace fs = std::filesystem;

ExperimentConfig ExperimentConfig::FromKeyValues(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.trainer = TrainerConfig::FromKeyValues(kv);
  std::vector<long> fallback(c.seeds.begin(), c.seeds.end());
  c.seeds.clear();
  for (long s : kv.get_int_list("seeds", fallback)) {
    Require(s >= 0, "seeds must be non-negative");
    c.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  c.eval_episodes = static_cast<int>(kv.get_int("eval_episodes", c.eval_episodes));
  c.out_dir = kv.get_string("out_dir", c.out_dir);
  c.workers = static_cast<int>(kv.get_int("workers", c.workers));
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  trainer.validate();
  Require(!seeds.empty(), "at least one seed is required");
  Require(eval_episodes >= 1, "eval_episodes must be >= 1");
  Require(workers >= 0, "workers must be >= 0");
}

std::string RunName(const TrainerConfig& config) {
  return std::string(env::ScenarioName(config.scenario.scenario)) + "_" + std::string(MethodName(config.method)) +
         "_" + std::to_string(config.seed);
}

void WriteCurveHeader(std::ostream& out, bool with_influence) {
  out << "episode,mean_step_reward,mean_distance,collision_rate,empowerment_bound";
  if (with_influence) out << ",social_influence";
  out << ",wall_clock_s\n";
}

void WriteCurveRow(std::ostream& out, const EpisodeMetrics& m, bool with_influence) {
  out << m.episode << ',' << m.mean_step_reward << ',' << m.mean_distance << ',' << m.collision_rate << ','
      << m.empowerment_bound;
  if (with_influence) out << ',' << m.social_influence;
  out << ',' << m.wall_clock_s << '\n';
}

namespace {

SeedRun TrainOne(const ExperimentConfig& config, std::uint64_t seed) {
  SeedRun run;
  run.seed = seed;
  TrainerConfig tc = config.trainer;
  tc.seed = seed;
  const std::string name = RunName(tc);
  const fs::path dir(config.out_dir);
  run.curve_csv = (dir / (name + ".csv")).string();
  run.checkpoint = (dir / (name + ".ckpt")).string();
  const bool with_influence = tc.method == Method::kSocialInfluence;
  std::ofstream csv(run.curve_csv);
  Require(csv.good(), "cannot write '" + run.curve_csv + "'");
  csv.precision(10);
  WriteCurveHeader(csv, with_influence);
  Trainer trainer(tc);
  trainer.train([&](const EpisodeMetrics& m) { WriteCurveRow(csv, m, with_influence); },
                [&](int episode, const Checkpoint& ckpt) {
                  if (episode == tc.episodes) {
                    SaveCheckpoint(run.checkpoint, ckpt);
                  } else {
                    SaveCheckpoint((dir / (name + "_ep" + std::to_string(episode) + ".ckpt")).string(), ckpt);
                  }
                });
  csv.flush();
  Require(csv.good(), "failed writing '" + run.curve_csv + "'");
  run.ok = true;
  return run;
}

std::vector<std::vector<double>> ReadNumericCsv(const std::string& path, std::string* header) {
  std::ifstream in(path);
  Require(in.good(), "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void WriteSummaryCsv(const std::vector<std::string>& curve_csvs, const std::string& path) {
  Require(!curve_csvs.empty(), "no learning curves to summarize");
  std::string header;
  std::vector<std::vector<std::vector<double>>> curves;
  for (const std::string& p : curve_csvs) {
    std::string h;
    curves.push_back(ReadNumericCsv(p, &h));
    if (header.empty()) header = h;
    Require(h == header, "learning curves have different columns");
    Require(curves.back().size() == curves.front().size(), "learning curves have different lengths");
  }
  std::ofstream out(path);
  Require(out.good(), "cannot write '" + path + "'");
  out.precision(10);
  out << header << '\n';
  const double n = static_cast<double>(curves.size());
  for (std::size_t r = 0; r < curves.front().size(); ++r) {
    for (std::size_t c = 0; c < curves.front()[r].size(); ++c) {
      double sum = 0.0;
      for (const auto& curve : curves) sum += curve[r].at(c);
      out << (c ? "," : "") << sum / n;
    }
    out << '\n';
  }
}

std::vector<SeedRun> Run(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.out_dir);
  std::vector<SeedRun> runs(config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  TrainerConfig named = config.trainer;
  const std::string prefix = std::string(env::ScenarioName(named.scenario.scenario)) + "_" +
                             std::string(MethodName(named.method));
  std::ofstream log((fs::path(config.out_dir) / (prefix + "_run.log")).string(), std::ios::app);
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        runs[i] = TrainOne(config, config.seeds[i]);
      } catch (const std::exception& e) {
        runs[i].seed = config.seeds[i];
        runs[i].ok = false;
        runs[i].error = e.what();
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "seed " << runs[i].seed << ": " << (runs[i].ok ? "ok" : "FAILED: " + runs[i].error) << '\n';
      log.flush();
    }
  };
  int workers = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(runs.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<std::string> ok;
  for (const SeedRun& r : runs) {
    if (r.ok) ok.push_back(r.curve_csv);
  }
  if (!ok.empty()) WriteSummaryCsv(ok, (fs::path(config.out_dir) / (prefix + "_summary.csv")).string());
  return runs;
}

namespace {

std::vector<OneHot> GreedyActions(const PolicySet& p, const env::JointObservation& o) {
  std::vector<OneHot> out;
  const Vector* obs[] = {&o.speaker, &o.listener};
  for (int i = 0; i < env::kNumAgents; ++i) {
    const Vector logits = p.actors[static_cast<std::size_t>(i)].forward(*obs[i]);
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    out.emplace_back(static_cast<int>(logits.size()), static_cast<int>(best));
  }
  return out;
}

void CheckPolicies(const PolicySet& p) {
  Require(p.actors.size() == static_cast<std::size_t>(env::kNumAgents), "policy set needs one actor per agent");
  for (int i = 0; i < env::kNumAgents; ++i) {
    const DenseNet& a = p.actors[static_cast<std::size_t>(i)];
    Require(a.input_dim() == env::ObsDim(p.scenario, i) && a.output_dim() == env::ActionDim(p.scenario, i),
            "checkpoint actors do not match the scenario '" + std::string(env::ScenarioName(p.scenario.scenario)) +
                "'");
  }
}

}  // namespace

EvalReport Evaluate(const PolicySet& policies, int episodes, std::uint64_t eval_seed) {
  Require(episodes >= 1, "evaluation needs at least one episode");
  CheckPolicies(policies);
  const env::ScenarioConfig& sc = policies.scenario;
  EvalReport rep;
  rep.scenario = std::string(env::ScenarioName(sc.scenario));
  rep.method = policies.method;
  rep.seed = policies.seed;
  double dist = 0.0, hits = 0.0;
  int episode_hits = 0;
  for (int e = 0; e < episodes; ++e) {
    env::WorldState s = env::Reset(sc, DeriveSeed(eval_seed, static_cast<std::uint64_t>(e)));
    EpisodeEval ev;
    for (int t = 0; t < sc.episode_length; ++t) {
      const std::vector<OneHot> a = GreedyActions(policies, env::Observe(s, sc));
      env::StepResult r = env::Step(s, {a[0], a[1]}, sc);
      ev.mean_distance += r.state.target_distance();
      ev.hit_rate += r.collision ? 1.0 : 0.0;
      s = std::move(r.state);
    }
    ev.any_hit = ev.hit_rate > 0.0;
    dist += ev.mean_distance;
    hits += ev.hit_rate;
    episode_hits += ev.any_hit ? 1 : 0;
    ev.mean_distance /= sc.episode_length;
    ev.hit_rate /= sc.episode_length;
    rep.episodes.push_back(ev);
  }
  const double steps = static_cast<double>(episodes) * sc.episode_length;
  rep.average_distance = dist / steps;
  rep.hit_rate = hits / steps;
  rep.episode_hit_rate = static_cast<double>(episode_hits) / episodes;
  return rep;
}

void WriteEvalCsv(std::ostream& out, const EvalReport& r) {
  const auto p = out.precision(10);
  out << "scenario,method,seed,episodes,average_distance,obstacle_hit_rate,episode_hit_rate\n";
  out << r.scenario << ',' << r.method << ',' << r.seed << ',' << r.episodes.size() << ',' << r.average_distance
      << ',' << r.hit_rate << ',' << r.episode_hit_rate << '\n';
  out.precision(p);
}

void WriteEvalEpisodesCsv(std::ostream& out, const EvalReport& r) {
  const auto p = out.precision(10);
  out << "episode,mean_distance,hit_rate,any_hit\n";
  for (std::size_t e = 0; e < r.episodes.size(); ++e) {
    out << e << ',' << r.episodes[e].mean_distance << ',' << r.episodes[e].hit_rate << ','
        << (r.episodes[e].any_hit ? 1 : 0) << '\n';
  }
  out.precision(p);
}

std::vector<std::vector<int>> ActionHistogram(const PolicySet& policies, int episodes, std::uint64_t eval_seed) {
  Require(episodes >= 1, "histogram needs at least one episode");
  CheckPolicies(policies);
  const env::ScenarioConfig& sc = policies.scenario;
  std::vector<std::vector<int>> counts;
  for (int e = 0; e < episodes; ++e) {
    std::vector<int> c(env::kListenerActions, 0);
    env::WorldState s = env::Reset(sc, DeriveSeed(eval_seed, static_cast<std::uint64_t>(e)));
    for (int t = 0; t < sc.episode_length; ++t) {
      const std::vector<OneHot> a = GreedyActions(policies, env::Observe(s, sc));
      ++c[static_cast<std::size_t>(a[env::kListener].index())];
      s = env::Step(s, {a[0], a[1]}, sc).state;
    }
    counts.push_back(std::move(c));
  }
  return counts;
}

void WriteHistogramCsv(std::ostream& out, const std::vector<std::vector<int>>& counts) {
  out << "episode";
  for (int a = 0; a < env::kListenerActions; ++a) out << ",action_" << a;
  out << '\n';
  for (std::size_t e = 0; e < counts.size(); ++e) {
    out << e;
    for (int c : counts[e]) out << ',' << c;
    out << '\n';
  }
}

std::vector<env::TrajectoryRow> FixedMessageProbe(const PolicySet& policies, int message, int steps) {
  CheckPolicies(policies);
  env::ScenarioConfig sc = policies.scenario;
  Require(message >= 0 && message < sc.vocabulary,
          "message index " + std::to_string(message) + " outside [0, " + std::to_string(sc.vocabulary) + ")");
  Require(steps >= 1, "probe needs at least one step");
  sc.episode_length = std::max(sc.episode_length, steps);
  env::WorldState s = env::Reset(sc, 0);
  s.position = env::Vec2::Zero();
  s.velocity = env::Vec2::Zero();
  s.acceleration = env::Vec2::Zero();
  const OneHot m(sc.vocabulary, message);
  std::vector<env::TrajectoryRow> rows;
  rows.push_back({0, s.position, s.velocity, message, env::kWaitAction, 0.0, false});
  for (int t = 0; t < steps; ++t) {
    s.message = m;
    const Vector logits = policies.actors[env::kListener].forward(env::Observe(s, sc).listener);
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    const env::StepResult r = env::Step(s, {m, OneHot(env::kListenerActions, static_cast<int>(best))}, sc);
    s = r.state;
    rows.push_back({s.t, s.position, s.velocity, message, static_cast<int>(best), r.reward, r.collision});
  }
  return rows;
}

ProbeSummary SummarizeProbes(const PolicySet& policies, int steps, double min_angle_deg, double still_threshold) {
  ProbeSummary out;
  const int k = policies.scenario.vocabulary;
  std::vector<int> moving;
  for (int m = 0; m < k; ++m) {
    const auto rows = FixedMessageProbe(policies, m, steps);
    const env::Vec2 d = rows.back().position - rows.front().position;
    out.displacement.push_back(d);
    if (d.norm() < still_threshold) {
      ++out.still_symbols;
    } else {
      moving.push_back(m);
    }
  }
  const double cos_limit = std::cos(min_angle_deg * std::numbers::pi / 180.0);
  auto apart = [&](int a, int b) {
    const env::Vec2& u = out.displacement[static_cast<std::size_t>(a)];
    const env::Vec2& v = out.displacement[static_cast<std::size_t>(b)];
    return u.dot(v) / (u.norm() * v.norm()) < cos_limit;
  };
  // Largest pairwise-separated subset; vocabularies are tiny, so brute force.
  const int n = static_cast<int>(moving.size());
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> pick;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) pick.push_back(moving[static_cast<std::size_t>(i)]);
    }
    bool ok = true;
    for (std::size_t a = 0; ok && a < pick.size(); ++a) {
      for (std::size_t b = a + 1; ok && b < pick.size(); ++b) ok = apart(pick[a], pick[b]);
    }
    if (ok) out.distinct_directions = std::max(out.distinct_directions, static_cast<int>(pick.size()));
  }
  return out;
}

}  // namespace temarl
