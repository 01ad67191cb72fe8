#include <benchmark/benchmark.h>

#include "fzeno/oracle.hpp"
#include "fzeno/zeno.hpp"

using namespace fzeno;

namespace {

ModelSpec desk(int n, double delta = 0.0) {
  ModelSpec s;
  s.energies.assign(n, 0.5);
  s.energies.back() += delta;
  s.lambda_sq = 0.01;
  return s;
}

void BM_W_sheet_two(benchmark::State& st) {
  const DispersionTable t{Model(desk(1))};
  const cplx z(0.5, -0.05);
  for (auto _ : st) benchmark::DoNotOptimize(t.W(z, Sheet::II));
}
BENCHMARK(BM_W_sheet_two);

void BM_W_sqrt(benchmark::State& st) {
  ModelSpec s = desk(1);
  s.form_factors.base = FormFactor::canonical_sqrt();
  const DispersionTable t{Model(s)};
  const cplx z(0.5, -0.05);
  for (auto _ : st) benchmark::DoNotOptimize(t.W(z, Sheet::II));
}
BENCHMARK(BM_W_sqrt);

void BM_find_poles(benchmark::State& st) {
  const ResolventKernel k{DispersionTable(Model(desk(static_cast<int>(st.range(0)), 1e-3)))};
  for (auto _ : st) benchmark::DoNotOptimize(solve_poles(k));
}
BENCHMARK(BM_find_poles)->Arg(2)->Arg(4)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_survival_engine(benchmark::State& st) {
  const ResolventKernel k{DispersionTable(Model(desk(3, 1e-3)))};
  const auto poles = solve_poles(k);
  for (auto _ : st) benchmark::DoNotOptimize(SurvivalEngine(k, poles));
}
BENCHMARK(BM_survival_engine)->Unit(benchmark::kMillisecond);

void BM_survival_curve(benchmark::State& st) {
  const ResolventKernel k{DispersionTable(Model(desk(3, 1e-3)))};
  const SurvivalEngine e(k, solve_poles(k));
  const auto s = build_state(Eigen::VectorXcd::Ones(3));
  std::vector<double> t(static_cast<std::size_t>(st.range(0)));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 2000.0 * i / t.size();
  for (auto _ : st) benchmark::DoNotOptimize(e.survival(s, t));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_survival_curve)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_oracle(benchmark::State& st) {
  const Model m(desk(2));
  const auto s = build_state(Eigen::VectorXcd::Ones(2));
  std::vector<double> t(51);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 4.0 * i;
  OracleOptions o;
  o.bins = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(oracle_survival(m, s, t, o));
}
BENCHMARK(BM_oracle)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
