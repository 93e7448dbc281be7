#include <cmath>

#include <gtest/gtest.h>

#include "ncrat/algorithms.hpp"
#include "ncrat/errors.hpp"
#include "support/oracles.hpp"

namespace ncrat {
namespace {

using testing::fixture_pencil;
using testing::load_fixture;
using testing::rel_diff;

ShiftedPencil fixture_shifted(const std::string& name) {
  nlohmann::json fx = load_fixture(name);
  return {fixture_pencil(fx.at("shifted_pencil").at("coeffs")),
          fx.at("shifted_pencil").at("corner").get<Index>()};
}

// Cauchy transform of f(X) for X ~ mu by quadrature over the angle.
template <class F>
Complex pushforward_cauchy(const Law& mu, F f, Complex z, int nodes = 200000) {
  auto [lo, hi] = mu.density_support();
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  Complex acc = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double th = M_PI * (k + 0.5) / nodes;
    const double t = c + h * std::cos(th);
    acc += mu.density(t) * h * std::sin(th) * (M_PI / nodes) / (z - f(t));
  }
  return acc;
}

TEST(ShiftedPencil, ReferencePencilsRepresentTheirExpressions) {
  Rng rng = make_rng({51});
  for (const char* name : {"anticommutator.json", "rational_distr.json"}) {
    ShiftedPencil p = fixture_shifted(name);
    EXPECT_TRUE(p.pencil.is_hermitian());
    NcExpr r = parse_expr(load_fixture(name).at("expression").get<std::string>(), 2);
    for (Index n : {1, 2, 3}) {
      MatTuple x = random_hermitian_tuple(2, n, rng);
      EXPECT_LT(rel_diff(shifted_pencil_value(p, x), eval_expr(r, x)), 1e-10) << name;
    }
  }
}

TEST(ShiftedPencil, ReferenceBrownPencilRepresentsHermitization) {
  ShiftedPencil p = fixture_shifted("rational_brown.json");
  EXPECT_TRUE(p.pencil.is_hermitian());
  NcExpr r = parse_expr(load_fixture("rational_brown.json").at("expression").get<std::string>(), 2);
  Rng rng = make_rng({52});
  for (Index n : {1, 2, 3}) {
    MatTuple x = random_hermitian_tuple(2, n, rng);
    MatC v = eval_expr(r, x);
    MatC want = MatC::Zero(2 * n, 2 * n);
    want.topRightCorner(n, n) = v;
    want.bottomLeftCorner(n, n) = v.adjoint();
    EXPECT_LT(rel_diff(shifted_pencil_value(p, x), want), 1e-10);
  }
}

TEST(ShiftedPencil, BuiltPencilsAgreeWithReferencePencils) {
  Rng rng = make_rng({53});
  for (const char* name : {"anticommutator.json", "rational_distr.json"}) {
    NcExpr r = parse_expr(load_fixture(name).at("expression").get<std::string>(), 2);
    ShiftedPencil reference = fixture_shifted(name);
    for (RealizationPath path : {RealizationPath::SaFlr, RealizationPath::Minimal}) {
      ShiftedPencil ours = build_shifted_pencil(realize_at(r, 2, path));
      EXPECT_TRUE(ours.pencil.is_hermitian());
      EXPECT_EQ(ours.corner, 1);
      for (int k = 0; k < 20; ++k) {
        MatTuple x = random_hermitian_tuple(2, 1 + k % 3, rng);
        EXPECT_LT(rel_diff(shifted_pencil_value(ours, x), shifted_pencil_value(reference, x)), 1e-8);
      }
    }
  }
}

TEST(ShiftedPencil, MinimalAnticommutatorHasFiveRows) {
  NcExpr p = parse_expr("x1*x2+x2*x1", 2);
  GeneralizedRealization g = realize_at(p, 2, RealizationPath::Minimal);
  EXPECT_EQ(build_shifted_pencil(g).size(), fixture_shifted("anticommutator.json").size());
  GeneralizedRealization s = realize_at(p, 2, RealizationPath::SaFlr);
  EXPECT_GE(s.state_dim(), g.state_dim());
}

TEST(ShiftedPencil, NonSelfadjointInputRejected) {
  GeneralizedRealization g;
  g.delta = MatC::Zero(1, 1);
  g.xi = MatC::Ones(2, 1);
  MatC a(2, 2);
  a << 1, 2, 0, 1;
  g.lambda = LinearPencil({a, MatC::Identity(2, 2)});
  try {
    build_shifted_pencil(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSelfadjointInput);
  }
}

TEST(ShiftedPencil, HermitizedRealizationEvaluates) {
  NcExpr r = parse_expr("x1 + 2i*x2*x1", 2);
  Rng rng = make_rng({54});
  for (RealizationPath path : {RealizationPath::SaFlr, RealizationPath::Minimal}) {
    GeneralizedRealization g = hermitized_realization(r, 2, path);
    MatTuple x = random_hermitian_tuple(2, 2, rng);
    MatC v = eval_expr(r, x);
    MatC want = MatC::Zero(4, 4);
    want.topRightCorner(2, 2) = v;
    want.bottomLeftCorner(2, 2) = v.adjoint();
    EXPECT_LT(rel_diff(eval_generalized(g, x), want), 1e-9);
  }
}

TEST(ExprCauchy, IdentityIsTheLaw) {
  Law s = Law::semicircle(0, 1);
  ShiftedPencil p = build_shifted_pencil(realize_at(parse_expr("x1", 1), 1, RealizationPath::Auto));
  for (Complex z : {Complex(0, 1), Complex(1, 0.5), Complex(2.5, 0.01)}) {
    MatC g = cauchy_of_expr(p, {s}, MatC::Constant(1, 1, z));
    EXPECT_LT(std::abs(g(0, 0) - s.cauchy(z)), 1e-6) << z;
  }
}

TEST(ExprCauchy, SquareOfSemicircleIsFreePoisson) {
  Law s = Law::semicircle(0, 1);
  Law mp = Law::marchenko_pastur(1, 1);
  ShiftedPencil p = build_shifted_pencil(realize_at(parse_expr("x1*x1", 1), 1, RealizationPath::Auto));
  ExprCauchy cauchy(p, {s});
  for (Complex z : {Complex(1, 1), Complex(2, 0.3), Complex(-0.5, 0.2)}) {
    CauchyDiagnostics d;
    const Complex g = cauchy(MatC::Constant(1, 1, z), &d)(0, 0);
    EXPECT_LT(std::abs(g - testing::quadrature_cauchy(mp, z)), 1e-5) << z;
    EXPECT_GT(d.levels, 0);
  }
}

TEST(ExprCauchy, InverseOfShiftedSemicircle) {
  Law s = Law::semicircle(0, 1);
  ShiftedPencil p =
      build_shifted_pencil(realize_at(parse_expr("inv(4-x1)", 1), 1, RealizationPath::Auto));
  for (Complex z : {Complex(0.25, 0.05), Complex(0.5, 0.5), Complex(0.1, 0.02)}) {
    const Complex g = cauchy_of_expr(p, {s}, MatC::Constant(1, 1, z))(0, 0);
    const Complex want = pushforward_cauchy(s, [](double t) { return 1.0 / (4.0 - t); }, z);
    EXPECT_LT(std::abs(g - want), 1e-5) << z;
  }
}

TEST(ExprCauchy, WrongLawCountIsConfigError) {
  ShiftedPencil p = fixture_shifted("anticommutator.json");
  try {
    ExprCauchy c(p, {Law::semicircle(0, 1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(ExprCauchy, ReferenceAndBuiltPencilsGiveSameTransform) {
  std::vector<Law> laws{Law::marchenko_pastur(1, 1), Law::semicircle(0, 1)};
  ShiftedPencil reference = fixture_shifted("anticommutator.json");
  ShiftedPencil ours = build_shifted_pencil(
      realize_at(parse_expr("x1*x2+x2*x1", 2), 2, RealizationPath::SaFlr));
  for (Complex z : {Complex(0.5, 0.5), Complex(-2, 0.2)}) {
    const Complex a = cauchy_of_expr(reference, laws, MatC::Constant(1, 1, z))(0, 0);
    const Complex b = cauchy_of_expr(ours, laws, MatC::Constant(1, 1, z))(0, 0);
    // both sides carry the schedule's 1e-6 acceptance error
    EXPECT_LT(std::abs(a - b), 1e-5);
    EXPECT_LT(a.imag(), 0.0);
  }
}

TEST(Stieltjes, InvertsPoissonKernel) {
  // G(z) = 1/(z - a) gives the Cauchy kernel of width eta.
  std::vector<double> t = uniform_grid(-1, 1, 201);
  ASSERT_EQ(t.size(), 201u);
  EXPECT_DOUBLE_EQ(t.front(), -1.0);
  EXPECT_DOUBLE_EQ(t.back(), 1.0);
  const double eta = 0.1;
  std::vector<Complex> g;
  for (double v : t) g.push_back(1.0 / Complex(v, eta));
  DensityGrid d = stieltjes_invert(t, g, eta);
  EXPECT_NEAR(d.density[100], 1.0 / (M_PI * eta), 1e-10);
  EXPECT_NEAR(d.mass, 2.0 * std::atan(1.0 / eta) / M_PI, 1e-3);
}

TEST(Pipeline, SemicircleDistribution) {
  std::vector<double> t = uniform_grid(-2.5, 2.5, 201);
  DensityGrid d = compute_distribution(parse_expr("x1", 1), 1, {Law::semicircle(0, 1)}, t, 1e-4);
  EXPECT_TRUE(d.gaps.empty());
  std::vector<double> ref;
  for (double v : t) ref.push_back(testing::semicircle_density(v, 0, 1));
  EXPECT_LT(testing::l1_on_grid(t, d.density, ref), 0.02);
  EXPECT_NEAR(d.mass, 1.0, 0.02);
}

TEST(Brown, HermitizedZeroIsExplicit) {
  // r = 0: the corner entry is conj(z) / (|z|^2 + eps^2) exactly.
  HermitizedCauchy h(parse_expr("0*x1", 1), 1, {Law::semicircle(0, 1)}, 0.1);
  for (Complex z : {Complex(0.5, 0.2), Complex(-1, 1)}) {
    const Complex want = std::conj(z) / (std::norm(z) + 0.01);
    EXPECT_LT(std::abs(h(z) - want), 1e-6) << z;
  }
}

TEST(Brown, CircularElementTransform) {
  // x1 + i x2 with variance-1/2 semicircles is circular: conj(z) inside the
  // unit disk, 1/z outside, as eps -> 0.
  std::vector<Law> laws(2, Law::semicircle(0, 0.5));
  HermitizedCauchy h(parse_expr("x1 + i*x2", 2), 2, laws, 1e-3);
  const Complex in(0.3, 0.2), out(1.5, 0.5);
  EXPECT_LT(std::abs(h(in) - std::conj(in)), 1e-2);
  EXPECT_LT(std::abs(h(out) - 1.0 / out), 1e-2);
}

TEST(Brown, SmallCircularGrid) {
  std::vector<Law> laws(2, Law::semicircle(0, 0.5));
  std::vector<double> x = uniform_grid(-1.5, 1.5, 31);
  BrownGrid b = compute_brown(parse_expr("x1 + i*x2", 2), 2, laws, x, x, 0.05);
  EXPECT_EQ(b.density.size(), 31u * 31u);
  EXPECT_NEAR(b.at(15, 15), 1.0 / M_PI, 0.05);
  EXPECT_LT(b.at(0, 0), 0.01);
  EXPECT_NEAR(b.mass, 1.0, 0.1);
}

TEST(ExprCauchy, UnsettledScheduleIsReported) {
  EpsSchedule sched;
  sched.start = 0.1;
  sched.final_eps = 0.05;
  sched.fallback_tol = 1e-14;
  ShiftedPencil p = fixture_shifted("rational_distr.json");
  std::vector<Law> laws(2, Law::semicircle(0, 1));
  try {
    cauchy_of_expr(p, laws, MatC::Constant(1, 1, Complex(0.3, 0.01)), sched);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BoundaryLimitUnstable);
    EXPECT_TRUE(e.payload().contains("deltas"));
  }
}

TEST(Brown, SelfadjointMarginalMatchesDistribution) {
  const double eps = 0.05;
  std::vector<double> x = uniform_grid(-2.5, 2.5, 101);
  std::vector<double> y = uniform_grid(-1.0, 1.0, 41);
  std::vector<Law> laws{Law::semicircle(0, 1)};
  NcExpr r = parse_expr("x1", 1);
  BrownGrid b = compute_brown(r, 1, laws, x, y, eps);
  DensityGrid d = compute_distribution(r, 1, laws, x, eps);
  const double dy = y[1] - y[0];
  std::vector<double> marginal(x.size(), 0.0);
  for (std::size_t iy = 0; iy < y.size(); ++iy) {
    const double w = (iy == 0 || iy + 1 == y.size()) ? 0.5 * dy : dy;
    for (std::size_t ix = 0; ix < x.size(); ++ix) marginal[ix] += w * b.at(iy, ix);
  }
  EXPECT_LE(testing::l1_on_grid(x, marginal, d.density), 0.1);
}

TEST(ExprCauchy, ReflectionSymmetry) {
  // x1 -> -x1 preserves the law and negates the anticommutator
  NcExpr r = parse_expr("x1*x2+x2*x1", 2);
  ShiftedPencil p = build_shifted_pencil(realize_at(r, 2, RealizationPath::Auto));
  std::vector<Law> laws(2, Law::semicircle(0, 1));
  for (Complex z : {Complex(0.7, 0.05), Complex(1.9, 0.2), Complex(0.1, 1.0)}) {
    const Complex g = cauchy_of_expr(p, laws, MatC::Constant(1, 1, z))(0, 0);
    const Complex gr = cauchy_of_expr(p, laws, MatC::Constant(1, 1, -std::conj(z)))(0, 0);
    EXPECT_LT(std::abs(gr + std::conj(g)), 1e-8) << z;
  }
}

TEST(Brown, SelfadjointMassSitsOnRealAxis) {
  std::vector<double> x = uniform_grid(-2.5, 2.5, 101);
  std::vector<double> y = uniform_grid(-0.5, 0.5, 41);
  const double h = x[1] - x[0];
  BrownGrid b = compute_brown(parse_expr("x1", 1), 1, {Law::semicircle(0, 1)}, x, y, 0.01);
  double near = 0.0, total = 0.0;
  for (std::size_t iy = 0; iy < y.size(); ++iy)
    for (std::size_t ix = 0; ix < x.size(); ++ix) {
      total += b.at(iy, ix);
      if (std::abs(y[iy]) <= 3 * h + 1e-12) near += b.at(iy, ix);
    }
  EXPECT_GE(near, 0.9 * total);
}

}  // namespace
}  // namespace ncrat
