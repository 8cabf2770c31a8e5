#include <benchmark/benchmark.h>

#include "bifurc/bifurcation.hpp"
#include "bifurc/datagen.hpp"
#include "bifurc/network.hpp"
#include "bifurc/problems.hpp"
#include "bifurc/rng.hpp"
#include "bifurc/training.hpp"

using namespace bifurc;

static void ForwardPass(benchmark::State& state) {
  const std::size_t width = static_cast<std::size_t>(state.range(0));
  const MlpNetwork net = init_network({1, width, 1}, Activation::sigmoid, 1);
  ForwardTrace trace;
  const Vector p{0.7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(net, p, trace));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(ForwardPass)->Arg(20)->Arg(80)->Arg(320);

static void BackwardPass(benchmark::State& state) {
  const std::size_t width = static_cast<std::size_t>(state.range(0));
  const MlpNetwork net = init_network({1, width, 1}, Activation::sigmoid, 1);
  ForwardTrace trace;
  ParamGradient grad = ParamGradient::zeros_like(net);
  const Vector p{0.7};
  const Vector upstream{1.0};
  forward(net, p, trace);
  for (auto _ : state) {
    backward_params_accumulate(net, trace, upstream, grad);
    benchmark::DoNotOptimize(grad.weights[0].data.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BackwardPass)->Arg(20)->Arg(80)->Arg(320);

static void SmallestSingular(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  SplitMix64 rng(7);
  DenseMatrix m(n, n);
  for (double& x : m.data) x = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smallest_singular(m).sigma_min);
  }
}
BENCHMARK(SmallestSingular)->Arg(5)->Arg(22);

static void LossF1Epoch(benchmark::State& state) {
  const ProblemSpec spec = make_ex1_turning();
  const auto data = gen_ex1(1600, 3);
  const MlpNetwork net = init_network({1, static_cast<std::size_t>(state.range(0)), 1},
                                      Activation::sigmoid, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_f1(net, data, spec, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * data.size());
}
BENCHMARK(LossF1Epoch)->Arg(20)->Arg(320)->Unit(benchmark::kMillisecond);

static void LossF2Eval(benchmark::State& state) {
  const ProblemSpec spec = make_ex4_bvp();
  const MlpNetwork net = init_network({1, 100, 5}, Activation::sigmoid, 1);
  const Vector p{10.0};
  Vector v(5, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_f2(net, spec, p, v, 1.0));
  }
}
BENCHMARK(LossF2Eval);

BENCHMARK_MAIN();
