// Microbenchmarks for the hot paths: the pairwise kernel summation that
// dominates simulate_filaments, the dictionary metric, and one full RK4 step.

#include <benchmark/benchmark.h>

#include "filaments/currents.hpp"
#include "filaments/experiments.hpp"
#include "filaments/solver.hpp"

using namespace filaments;

namespace {

CurveFamily bench_family(int n, int m, int dim) {
  RandomCurveLaw law;
  law.kind = RandomCurveLaw::Kind::RandomCircle;
  law.dim = dim;
  for (int i = 0; i < dim; ++i) {
    law.center_lo[i] = -0.4;
    law.center_hi[i] = 0.4;
  }
  law.radius_min = 0.6;
  law.radius_max = 1.0;
  Rng rng(7);
  return sample_family(law, n, m, WeightMode::EqualOneOverN, rng);
}

void BM_VelocityBatchRotor2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CurveFamily fam = bench_family(n, 16, 2);
  const auto k = make_gaussian_rotor(0.8, 2);
  const SourceCloud src = build_sources(fam);
  std::vector<double> out(src.pos.size());
  for (auto _ : state) {
    velocity_batch(*k, src, src.pos.data(), src.total, out.data(), 1);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(src.total) * src.total);
}
BENCHMARK(BM_VelocityBatchRotor2D)->Arg(8)->Arg(32)->Arg(128);

void BM_VelocityBatchBiotSavart3D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CurveFamily fam = bench_family(n, 64, 3);
  const auto k = make_mollified_biot_savart(0.5);
  const SourceCloud src = build_sources(fam);
  std::vector<double> out(src.pos.size());
  for (auto _ : state) {
    velocity_batch(*k, src, src.pos.data(), src.total, out.data(), 1);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(src.total) * src.total);
}
BENCHMARK(BM_VelocityBatchBiotSavart3D)->Arg(3)->Arg(8);

void BM_SimulateStepRotor2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CurveFamily fam = bench_family(n, 16, 2);
  const auto k = make_gaussian_rotor(0.8, 2);
  SimulateOptions opt;
  opt.t_final = 0.01;
  opt.dt = 0.01;  // one RK4 step
  for (auto _ : state) {
    const SimulateResult r = simulate_filaments(fam, *k, opt);
    benchmark::DoNotOptimize(r.path.states.back().family.curves[0].pts.data());
  }
}
BENCHMARK(BM_SimulateStepRotor2D)->Arg(32)->Arg(128)->Arg(1024);

void BM_DictMetric(benchmark::State& state) {
  const CurveFamily a = bench_family(16, 16, 2);
  const CurveFamily b = bench_family(17, 16, 2);
  CurveFamily b16 = b;
  b16.curves.pop_back();
  b16.weights.pop_back();
  const auto dict = make_dictionary(2, 64, 8, 2.0, 4.0, 5);
  const FilamentCurrent xa{a}, xb{b16};
  for (auto _ : state) {
    benchmark::DoNotOptimize(dict_metric(xa, xb, dict));
  }
}
BENCHMARK(BM_DictMetric);

}  // namespace

BENCHMARK_MAIN();
