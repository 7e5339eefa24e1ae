#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qtunnel/determinants.hpp"
#include "qtunnel/gl_junction.hpp"
#include "qtunnel/oracle.hpp"
#include "qtunnel/potential.hpp"
#include "qtunnel/spectra.hpp"

namespace {

using namespace qtunnel;

void bm_gelfand_yaglom(benchmark::State& state) {
  const double T = static_cast<double>(state.range(0));
  auto W = [](double t) { return 1.0 - 2.0 / (std::cosh(t) * std::cosh(t)); };
  auto W0 = [](double) { return 1.0; };
  for (auto _ : state) benchmark::DoNotOptimize(gelfand_yaglom_ratio(W, W0, T, 0.1));
}
BENCHMARK(bm_gelfand_yaglom)->Arg(10)->Arg(20)->Arg(40);

void bm_kink_pipeline(benchmark::State& state) {
  auto model = PotentialModel::quartic_double_well();
  for (auto _ : state) benchmark::DoNotOptimize(analyze_instanton(model, {-0.5, 0.5}));
}
BENCHMARK(bm_kink_pipeline)->Unit(benchmark::kMillisecond);

void bm_grid_spectrum(benchmark::State& state) {
  auto model = PotentialModel::quartic_double_well();
  GridOptions opt;
  opt.points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(grid_spectrum(model, {-2.5, 2.5}, 0.1, opt));
}
BENCHMARK(bm_grid_spectrum)->Arg(1024)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

void bm_nonlinear_cpr(benchmark::State& state) {
  std::vector<double> delta;
  for (int i = 0; i < 16; ++i) delta.push_back(2 * std::numbers::pi * i / 16);
  const double L = state.range(0) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(nonlinear_cpr(L, delta));
}
BENCHMARK(bm_nonlinear_cpr)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_bloch_band(benchmark::State& state) {
  std::vector<double> theta;
  for (int i = 0; i < 33; ++i) theta.push_back(2 * std::numbers::pi * i / 32);
  for (auto _ : state) benchmark::DoNotOptimize(bloch_band_trace(1.0, static_cast<double>(state.range(0)), theta));
}
BENCHMARK(bm_bloch_band)->Arg(25)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
