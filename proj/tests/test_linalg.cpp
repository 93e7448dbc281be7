#include <gtest/gtest.h>

#include "ncrat/errors.hpp"
#include "ncrat/linalg.hpp"
#include "support/oracles.hpp"

namespace ncrat {
namespace {

TEST(Linalg, HermitianParts) {
  Rng rng = make_rng({1});
  MatC b = random_gaussian(4, 4, rng);
  EXPECT_LT(max_norm(real_part(b) + kI * imag_part(b) - b), 1e-14);
  EXPECT_TRUE(is_hermitian(real_part(b)));
  EXPECT_TRUE(is_hermitian(imag_part(b)));
}

TEST(Linalg, UpperHalfPlane) {
  MatC b = MatC::Identity(3, 3) * Complex(1.0, 0.5);
  EXPECT_NEAR(min_imag_eigenvalue(b), 0.5, 1e-14);
  EXPECT_TRUE(in_upper_half_plane(b, 0.1));
  EXPECT_FALSE(in_upper_half_plane(b, 0.6));
}

TEST(Linalg, TryInverseRejectsSingular) {
  MatC a(2, 2);
  a << 1, 2, 2, 4;
  EXPECT_FALSE(try_inverse(a).has_value());
  EXPECT_FALSE(is_invertible(a));
  a(1, 1) = 5;
  auto inv = try_inverse(a);
  ASSERT_TRUE(inv.has_value());
  EXPECT_LT(max_norm(*inv * a - MatC::Identity(2, 2)), 1e-14);
}

TEST(Linalg, InverseConditionLargeMatrixUsesEstimate) {
  Rng rng = make_rng({2});
  const Index n = kSvdCutoff + 10;
  MatC a = random_gaussian(n, n, rng) + 20.0 * MatC::Identity(n, n);
  const double rc = inverse_condition(a);
  EXPECT_GT(rc, 0.0);
  EXPECT_LE(rc, 1.0);
  a.col(3).setZero();
  EXPECT_LT(inverse_condition(a), 1e-12);
}

TEST(Linalg, SchurInverseMatchesDirect) {
  Rng rng = make_rng({3});
  MatC m = random_gaussian(5, 5, rng) + 3.0 * MatC::Identity(5, 5);
  MatC got = schur_inverse(m.topLeftCorner(2, 2), m.topRightCorner(2, 3),
                           m.bottomLeftCorner(3, 2), m.bottomRightCorner(3, 3));
  EXPECT_LT(testing::rel_diff(got, m.inverse()), 1e-12);
}

TEST(Linalg, HermitianEigAscendingUnitary) {
  Rng rng = make_rng({4});
  MatC h = random_hermitian(6, rng);
  HermitianEig e = hermitian_eig(h);
  for (Index i = 1; i < 6; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  EXPECT_LT(max_norm(e.vectors.adjoint() * e.vectors - MatC::Identity(6, 6)), 1e-12);
  MatC back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  EXPECT_LT(max_norm(back - h), 1e-12);
}

TEST(Linalg, RankRangeComplement) {
  Rng rng = make_rng({5});
  MatC a = random_gaussian(6, 2, rng) * random_gaussian(2, 5, rng);
  EXPECT_EQ(numerical_rank(a), 2);
  MatC r = orthonormal_range(a);
  EXPECT_EQ(r.cols(), 2);
  MatC c = orthogonal_complement(r, 6);
  EXPECT_EQ(c.cols(), 4);
  EXPECT_LT(max_norm(r.adjoint() * c), 1e-12);
  EXPECT_LT(max_norm(c.adjoint() * c - MatC::Identity(4, 4)), 1e-12);
}

TEST(Linalg, KronHermitizeBlockDiag) {
  MatC a(1, 2);
  a << 1, kI;
  MatC h = hermitize(a);
  EXPECT_EQ(h.rows(), 3);
  EXPECT_TRUE(is_hermitian(h));
  EXPECT_EQ(h(0, 2), kI);
  EXPECT_EQ(h(1, 2), Complex(0, 0));
  EXPECT_EQ(h(1, 0), Complex(1, 0));
  EXPECT_EQ(h(2, 0), -kI);

  MatC k = kron(MatC::Identity(2, 2), a);
  EXPECT_EQ(k.rows(), 2);
  EXPECT_EQ(k.cols(), 4);
  EXPECT_EQ(k(1, 3), kI);

  MatC d = block_diag(a, MatC::Identity(2, 2));
  EXPECT_EQ(d.rows(), 3);
  EXPECT_EQ(d.cols(), 4);
  EXPECT_EQ(d(2, 3), Complex(1, 0));
  EXPECT_EQ(d(0, 3), Complex(0, 0));
}

TEST(Linalg, RngIsKeyed) {
  Rng a = make_rng({7, 1, 2});
  Rng b = make_rng({7, 1, 2});
  Rng c = make_rng({7, 2, 1});
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

TEST(Linalg, GaussianVariance) {
  Rng rng = make_rng({8});
  MatC g = random_gaussian(200, 200, rng);
  EXPECT_NEAR(g.squaredNorm() / 40000.0, 1.0, 0.02);
}

TEST(Errors, CarriesCodeAndPayload) {
  Error e(ErrorCode::DomainError, "ncexpr", "outside", {{"path", "0.1"}});
  EXPECT_EQ(e.code(), ErrorCode::DomainError);
  EXPECT_EQ(to_string(e.code()), "DomainError");
  nlohmann::json j = e.to_json();
  EXPECT_EQ(j.at("module"), "ncexpr");
  EXPECT_EQ(j.dump().find("0.1") != std::string::npos, true);
}

}  // namespace
}  // namespace ncrat
