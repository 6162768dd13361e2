#include <benchmark/benchmark.h>

#include "temarl/dense_net.h"
#include "temarl/empowerment.h"
#include "temarl/gumbel.h"
#include "temarl/particle_env.h"
#include "temarl/trainer.h"
#include "temarl/transition_model.h"

namespace temarl {
namespace {

void BM_DenseForward(benchmark::State& state) {
  Rng rng(1);
  const int batch = static_cast<int>(state.range(0));
  DenseNet net("critic", {28, 64, 64, 1}, Activation::kRelu, Activation::kIdentity, rng);
  const Matrix x = Matrix::Random(batch, 28);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_DenseForward)->Arg(1)->Arg(256)->Arg(1024);

void BM_DenseForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const int batch = static_cast<int>(state.range(0));
  DenseNet net("critic", {28, 64, 64, 1}, Activation::kRelu, Activation::kIdentity, rng);
  const Matrix x = Matrix::Random(batch, 28);
  for (auto _ : state) {
    Tape tape;
    GradientMap g = tape.backward(tape.mean(tape.square(net.forward(tape, tape.constant(x)))));
    benchmark::DoNotOptimize(g);
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_DenseForwardBackward)->Arg(256)->Arg(1024);

void BM_EnvStep(benchmark::State& state) {
  const env::ScenarioConfig sc = env::ScenarioConfig::For(env::Scenario::kHard);
  env::WorldState s = env::Reset(sc, 3);
  const env::JointAction a{OneHot(sc.vocabulary, 1), OneHot(env::kListenerActions, 3)};
  for (auto _ : state) {
    env::StepResult r = env::Step(s, a, sc);
    benchmark::DoNotOptimize(r);
    if (r.state.t >= sc.episode_length) r.state.t = 0;
    s = std::move(r.state);
  }
}
BENCHMARK(BM_EnvStep);

void BM_EmpowermentIntrinsicReward(benchmark::State& state) {
  const env::ScenarioConfig sc = env::ScenarioConfig::For(env::Scenario::kHard);
  JointLayout layout{{{env::ObsDim(sc, 0), env::ActionDim(sc, 0)}, {env::ObsDim(sc, 1), env::ActionDim(sc, 1)}}};
  Rng rng(4);
  TransitionModel model(layout, TransitionModelConfig{}, rng);
  DenseNet speaker("agent0.actor", {layout.agents[0].obs_dim, 64, 64, layout.agents[0].action_dim},
                   Activation::kRelu, Activation::kIdentity, rng);
  DenseNet listener("agent1.actor", {layout.agents[1].obs_dim, 64, 64, layout.agents[1].action_dim},
                    Activation::kRelu, Activation::kIdentity, rng);
  std::vector<EmpowermentEstimator> es;
  es.emplace_back(layout, 0, 1, EmpowermentConfig{}, rng);
  es.emplace_back(layout, 1, 0, EmpowermentConfig{}, rng);
  const Matrix obs = Matrix::Random(static_cast<int>(state.range(0)), layout.obs_dim());
  for (auto _ : state) {
    benchmark::DoNotOptimize(IntrinsicReward(es, obs, {&speaker, &listener}, model, 1.0, rng));
  }
}
BENCHMARK(BM_EmpowermentIntrinsicReward)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_TrainerEpisode(benchmark::State& state) {
  TrainerConfig c;
  c.scenario = env::ScenarioConfig::For(env::Scenario::kHard);
  c.method = static_cast<Method>(state.range(0));
  c.episodes = 1000000;
  c.checkpoint_every = 0;
  Trainer t(c);
  while (t.buffer().size() < static_cast<std::size_t>(c.warmup)) t.run_episode();
  for (auto _ : state) benchmark::DoNotOptimize(t.run_episode());
  state.SetLabel(std::string(MethodName(c.method)));
}
BENCHMARK(BM_TrainerEpisode)
    ->Arg(static_cast<int>(Method::kBaseline))
    ->Arg(static_cast<int>(Method::kSocialInfluence))
    ->Arg(static_cast<int>(Method::kEmpowerment))
    ->Unit(benchmark::kMillisecond)
    ->Iterations(5);

}  // namespace
}  // namespace temarl

BENCHMARK_MAIN();
