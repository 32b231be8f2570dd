#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "outsync/closedloop.h"
#include "outsync/datagen.h"
#include "outsync/netgraph.h"
#include "outsync/synthesis.h"

namespace {

using namespace outsync;

MatrixXd Random(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n;
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

// Rotation exosystem, two leaders and three followers in a chain.
Scenario ChainScenario(int state_dim) {
  std::mt19937_64 rng(1);
  Scenario s;
  s.exo.s.resize(2, 2);
  s.exo.s << std::cos(0.3), std::sin(0.3), -std::sin(0.3), std::cos(0.3);
  s.exo.r = Random(rng, 1, 2);
  for (int i = 0; i < 5; ++i) {
    const MatrixXd a = Random(rng, state_dim, state_dim);
    const MatrixXd b = Random(rng, state_dim, 2);
    if (i < 2) {
      s.agents.push_back(AgentModel::Leader(a, b, Random(rng, 1, state_dim), Random(rng, 1, 2),
                                            Random(rng, state_dim, 1), Random(rng, 1, 1)));
    } else {
      s.agents.push_back(
          AgentModel::Follower(a, b, Random(rng, 1, state_dim), Random(rng, 1, 2)));
    }
  }
  s.graph.n_leaders = 2;
  s.graph.adjacency = MatrixXd::Zero(5, 5);
  s.graph.adjacency(0, 1) = 1.0;
  s.graph.adjacency(2, 0) = 1.0;
  s.graph.adjacency(3, 2) = 1.0;
  s.graph.adjacency(4, 3) = 1.0;
  s.graph.adjacency(4, 1) = 1.0;
  return s;
}

void BM_Pinv(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int n = static_cast<int>(state.range(0));
  const MatrixXd m = Random(rng, n, 2 * n);
  for (auto _ : state) benchmark::DoNotOptimize(Pinv(m));
}
BENCHMARK(BM_Pinv)->Arg(4)->Arg(16)->Arg(64);

void BM_StabilizingFeedback(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const int n = static_cast<int>(state.range(0));
  const MatrixXd a = 1.2 * Random(rng, n, n);
  const MatrixXd b = Random(rng, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(StabilizingFeedback(a, b));
}
BENCHMARK(BM_StabilizingFeedback)->Arg(3)->Arg(8)->Arg(16);

void BM_FollowerObserver(benchmark::State& state) {
  const Scenario s = ChainScenario(3);
  const FollowerCoupling c = ComputeFollowerCoupling(BuildPartition(s.graph));
  for (auto _ : state) benchmark::DoNotOptimize(DesignFollowerObserver(s.exo, c));
}
BENCHMARK(BM_FollowerObserver);

void BM_SynthesizeData(benchmark::State& state) {
  const Scenario s = ChainScenario(static_cast<int>(state.range(0)));
  const auto records = Collect(s, ExcitationConfig{7, DefaultHorizon(s)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(Synthesize(s, records, SynthesisMode::kData));
  }
}
BENCHMARK(BM_SynthesizeData)->Arg(3)->Arg(6);

void BM_SimulationStep(benchmark::State& state) {
  const Scenario s = ChainScenario(static_cast<int>(state.range(0)));
  const ControllerSet c = Synthesize(s, {}, SynthesisMode::kModel);
  SimState st = RandomInitialState(s, 5);
  for (auto _ : state) {
    st = Step(s, c, st);
    benchmark::DoNotOptimize(st.x0.data());
  }
}
BENCHMARK(BM_SimulationStep)->Arg(3)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
