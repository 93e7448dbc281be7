#include <benchmark/benchmark.h>

#include <vector>

#include "ncrat/algorithms.hpp"
#include "ncrat/freeprob.hpp"
#include "ncrat/linrep.hpp"
#include "ncrat/ncexpr.hpp"
#include "ncrat/rmt.hpp"

namespace {

using namespace ncrat;

const char* kRational = "inv(4-x1)+inv(4-x1)*x2*inv((4-x1)-x2*inv(4-x1)*x2)*x2*inv(4-x1)";

void BM_BuildFlr(benchmark::State& state) {
  NcExpr r = parse_expr(kRational, 2);
  for (auto _ : state) benchmark::DoNotOptimize(build_flr(r, 2));
}
BENCHMARK(BM_BuildFlr);

void BM_EvalFlr(benchmark::State& state) {
  NcExpr r = parse_expr(kRational, 2);
  Flr rho = build_flr(r, 2);
  Rng rng = make_rng({1});
  MatTuple x = random_hermitian_tuple(2, state.range(0), rng);
  for (auto _ : state) benchmark::DoNotOptimize(eval_flr(rho, x));
}
BENCHMARK(BM_EvalFlr)->Arg(4)->Arg(32);

void BM_LawConstruction(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(Law::marchenko_pastur(1, 1));
}
BENCHMARK(BM_LawConstruction);

void BM_AnticommutatorCauchy(benchmark::State& state) {
  NcExpr r = parse_expr("x1*x2+x2*x1", 2);
  ShiftedPencil p = build_shifted_pencil(realize_at(r, 2, RealizationPath::Auto));
  std::vector<Law> laws{Law::marchenko_pastur(1, 1), Law::semicircle(0, 1)};
  ExprCauchy g(p, laws);
  double t = -1.0;
  for (auto _ : state) {
    t = t > 1.0 ? -1.0 : t + 0.01;
    benchmark::DoNotOptimize(g(MatC::Constant(1, 1, Complex(t, 1e-2))));
  }
}
BENCHMARK(BM_AnticommutatorCauchy)->Unit(benchmark::kMillisecond);

void BM_DensityGrid(benchmark::State& state) {
  NcExpr r = parse_expr(kRational, 2);
  std::vector<Law> laws(2, Law::semicircle(0, 1));
  std::vector<double> t = uniform_grid(0.0, 0.6, 50);
  for (auto _ : state) benchmark::DoNotOptimize(compute_distribution(r, 2, laws, t, 1e-2));
}
BENCHMARK(BM_DensityGrid)->Unit(benchmark::kMillisecond);

void BM_BrownPoint(benchmark::State& state) {
  NcExpr r = parse_expr("0.7071067811865476*(x1 + i*x2)", 2);
  std::vector<Law> laws(2, Law::semicircle(0, 1));
  HermitizedCauchy h(r, 2, laws, 1e-2);
  for (auto _ : state) benchmark::DoNotOptimize(h(Complex(0.3, 0.4)));
}
BENCHMARK(BM_BrownPoint)->Unit(benchmark::kMillisecond);

void BM_GueSpectrum(benchmark::State& state) {
  NcExpr r = parse_expr("x1*x2+x2*x1", 2);
  const Index n = state.range(0);
  std::vector<Ensemble> ens{Ensemble::gue(n), Ensemble::gue(n)};
  for (auto _ : state) benchmark::DoNotOptimize(empirical_spectrum(r, ens, 1, 3, true));
}
BENCHMARK(BM_GueSpectrum)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
