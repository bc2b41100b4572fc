#include <benchmark/benchmark.h>

#include <random>

#include "dotin/backbone.hpp"
#include "dotin/drop.hpp"
#include "dotin/model.hpp"

namespace {

dotin::GraphInstance ring_graph(std::size_t n, std::size_t f) {
  dotin::GraphInstance g;
  g.features = dotin::Tensor(n, f);
  g.adjacency = dotin::Tensor(n, n);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < f; ++c) g.features(i, c) = gauss(rng);
    g.adjacency(i, (i + 1) % n) = g.adjacency((i + 1) % n, i) = 1.0;
  }
  return g;
}

dotin::ModelSpec spec_for(double alpha, std::size_t hidden) {
  dotin::ModelSpec spec;
  spec.in_features = 16;
  spec.hidden = hidden;
  spec.layers = 3;
  spec.alpha = {alpha, alpha, 0.0};
  spec.tasks = {dotin::TaskSpec{"cls", dotin::TaskKind::classification, 2, 1.0}};
  return spec;
}

void BM_Forward(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  const auto n = static_cast<std::size_t>(state.range(1));
  const dotin::DotinModel model(spec_for(alpha, 64), 1);
  const auto g = ring_graph(n, 16);
  for (auto _ : state) {
    dotin::Tape tape;
    benchmark::DoNotOptimize(dotin::dotin_forward(model, tape, g));
  }
}
BENCHMARK(BM_Forward)->ArgsProduct({{0, 5, 9}, {64, 256}});

void BM_ForwardBackward(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 10.0;
  const dotin::DotinModel model(spec_for(alpha, 64), 1);
  const auto g = ring_graph(128, 16);
  for (auto _ : state) {
    dotin::Tape tape;
    const auto bound = model.bind(tape);
    auto r = model.forward(bound, g);
    tape.backward(dotin::squared_norm(r.embeddings[0]));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(5)->Arg(9);

void BM_SelectDrop(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> s(n);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  for (double& v : s) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(dotin::select_drop(s, 0.5));
}
BENCHMARK(BM_SelectDrop)->Range(64, 4096);

}  // namespace

BENCHMARK_MAIN();
