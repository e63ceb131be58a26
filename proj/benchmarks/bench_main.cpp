#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ringrc/nodes.hpp"
#include "ringrc/readout.hpp"
#include "ringrc/ring_dynamics.hpp"
#include "ringrc/signal_chain.hpp"

using namespace ringrc;

namespace {

// 100 PRBS bits at 1 Gb/s sampled at 80 GSa/s.
void BM_IntegrateTrace(benchmark::State& state) {
  const auto p = RingParams::silicon_default();
  const auto bits = prbs8_generate(1).bits;
  const std::vector<std::uint8_t> head(bits.begin(), bits.begin() + 100);
  const auto in = encode_ook(head, 1e9, dbm_to_watt(static_cast<double>(state.range(0))), ModulatorModel{}, 80e9);
  std::size_t steps = 0;
  for (auto _ : state) {
    const auto r = integrate_trace(in, -10e9, p);
    steps += r.steps;
    benchmark::DoNotOptimize(r.final_state);
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.size()));
}
BENCHMARK(BM_IntegrateTrace)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_RidgeSolve(benchmark::State& state) {
  const auto rows = state.range(0), cols = state.range(1);
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return g(rng); });
  x.col(cols - 1).setOnes();
  const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(rows, [&] { return g(rng) > 0 ? 1.0 : 0.0; });
  for (auto _ : state) benchmark::DoNotOptimize(ridge_solve(x, y, 1e-3));
}
BENCHMARK(BM_RidgeSolve)->Args({2550, 16})->Args({2550, 91});

void BM_LambdaSelection(benchmark::State& state) {
  std::mt19937 rng(2);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(2550, 16, [&] { return g(rng); });
  x.col(15).setOnes();
  const Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(2550, [&] { return g(rng) > 0 ? 1.0 : 0.0; });
  const auto grid = default_lambda_grid(x);
  for (auto _ : state) benchmark::DoNotOptimize(kfold_lambda_select(x, y, 5, grid));
}
BENCHMARK(BM_LambdaSelection)->Unit(benchmark::kMillisecond);

void BM_Rebin(benchmark::State& state) {
  const double bitrate = static_cast<double>(state.range(0)) * 1e6;
  std::vector<double> v(400000);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 2);
  for (auto& s : v) s = u(rng);
  const auto w = OpticalWaveform::from_power(std::move(v), 20e9);
  for (auto _ : state) benchmark::DoNotOptimize(rebin_to_nodes(w, bitrate, 5, 0));
}
BENCHMARK(BM_Rebin)->Arg(50)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
