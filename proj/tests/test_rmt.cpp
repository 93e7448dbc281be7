#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "ncrat/errors.hpp"
#include "ncrat/rmt.hpp"
#include "support/oracles.hpp"

namespace ncrat {
namespace {

TEST(Ensemble, GueMoments) {
  Rng rng = make_rng({61});
  MatC x = Ensemble::gue(400, 2.0, 1.0).sample(rng);
  EXPECT_TRUE(is_hermitian(x));
  const double n = 400;
  const double m1 = x.trace().real() / n;
  const MatC c = x - MatC::Identity(400, 400);
  const double m2 = (c * c).trace().real() / n;
  EXPECT_NEAR(m1, 1.0, 0.05);
  EXPECT_NEAR(m2, 2.0, 0.1);
}

TEST(Ensemble, WishartMatchesFreePoisson) {
  Law mp = Law::marchenko_pastur(0.5, 2.0);
  Ensemble e = Ensemble::for_law(400, mp);
  EXPECT_EQ(e.kind(), Ensemble::Kind::Wishart);
  Rng rng = make_rng({62});
  MatC x = e.sample(rng);
  HermitianEig eig = hermitian_eig(x);
  // mean rate * scale, half of the spectrum in the atom at 0
  EXPECT_NEAR(eig.values.mean(), 1.0, 0.05);
  int zeros = 0;
  for (Index i = 0; i < eig.values.size(); ++i) zeros += std::abs(eig.values(i)) < 1e-8;
  EXPECT_NEAR(zeros / 400.0, 0.5, 0.01);
  EXPECT_LT(eig.values.maxCoeff(), mp.support().second * 1.1);
}

TEST(Ensemble, FromLawKeepsAtoms) {
  Law a = Law::atomic({-1.0, 2.0}, {0.5, 0.5});
  Ensemble e = Ensemble::for_law(200, a);
  EXPECT_EQ(e.kind(), Ensemble::Kind::FromLaw);
  Rng rng = make_rng({63});
  HermitianEig eig = hermitian_eig(e.sample(rng));
  for (Index i = 0; i < eig.values.size(); ++i)
    EXPECT_LT(std::min(std::abs(eig.values(i) + 1.0), std::abs(eig.values(i) - 2.0)), 1e-9);
}

TEST(Ensemble, HaarIsUnitary) {
  Rng rng = make_rng({64});
  MatC u = haar_unitary(50, rng);
  EXPECT_LT(max_norm(u.adjoint() * u - MatC::Identity(50, 50)), 1e-12);
}

TEST(Spectrum, DeterministicPerSeed) {
  NcExpr r = parse_expr("x1*x2+x2*x1", 2);
  std::vector<Ensemble> ens{Ensemble::gue(50), Ensemble::gue(50)};
  SpectrumPool a = empirical_spectrum(r, ens, 2, 7, true);
  SpectrumPool b = empirical_spectrum(r, ens, 2, 7, true, 2);
  ASSERT_EQ(a.real.size(), 100u);
  EXPECT_EQ(a.real, b.real);
  EXPECT_TRUE(std::is_sorted(a.real.begin(), a.real.end()));
  SpectrumPool c = empirical_spectrum(r, ens, 2, 8, true);
  EXPECT_NE(a.real, c.real);
}

TEST(Spectrum, ComplexPath) {
  NcExpr r = parse_expr("x1 + i*x2", 2);
  std::vector<Ensemble> ens{Ensemble::gue(100, 0.5), Ensemble::gue(100, 0.5)};
  SpectrumPool p = empirical_spectrum(r, ens, 1, 1, false);
  ASSERT_EQ(p.complex.size(), 100u);
  int inside = 0;
  for (Complex z : p.complex) inside += std::abs(z) < 1.1;
  EXPECT_GT(inside, 90);
}

TEST(Spectrum, DomainStarved) {
  NcExpr r = parse_expr("inv(x1 - x1)", 1);
  try {
    empirical_spectrum(r, {Ensemble::gue(10)}, 3, 0, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainStarved);
  }
}

TEST(Compare, ExactSamplesAreClose) {
  std::vector<double> t = uniform_grid(-2.2, 2.2, 441);
  DensityGrid d;
  d.t = t;
  for (double v : t) d.density.push_back(testing::semicircle_density(v, 0, 1));
  Rng rng = make_rng({65});
  Law s = Law::semicircle(0, 1);
  std::vector<double> pool(20000);
  for (double& v : pool) v = s.sample(rng);
  std::sort(pool.begin(), pool.end());
  DensityComparison c = compare_density(d, pool, 60);
  EXPECT_LT(c.l1, 0.06);
  EXPECT_LT(c.ks, 0.02);

  std::vector<double> shifted = pool;
  for (double& v : shifted) v += 1.0;
  EXPECT_GT(compare_density(d, shifted, 60).l1, 0.5);
  EXPECT_THROW(compare_density(d, {}, 60), Error);
}

TEST(Coverage, CountsPointsInSupport) {
  BrownGrid b;
  b.x = uniform_grid(-1, 1, 21);
  b.y = b.x;
  for (double y : b.y)
    for (double x : b.x) b.density.push_back(x * x + y * y < 0.25 ? 1.0 : 0.0);
  std::vector<Complex> pool{{0.0, 0.0}, {0.1, 0.1}, {0.9, 0.9}, {5.0, 0.0}};
  EXPECT_DOUBLE_EQ(brown_coverage(b, pool, 0.05), 0.5);
}

}  // namespace
}  // namespace ncrat
