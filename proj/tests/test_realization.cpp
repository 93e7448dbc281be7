#include <gtest/gtest.h>

#include "ncrat/errors.hpp"
#include "ncrat/linrep.hpp"
#include "ncrat/realization.hpp"
#include "support/oracles.hpp"

namespace ncrat {
namespace {

using testing::fixture_matrix;
using testing::rel_diff;

Realization from_fixture(const nlohmann::json& j) {
  std::vector<MatC> a;
  for (const auto& m : j.at("a")) a.push_back(fixture_matrix(m));
  const Index d1 = j.at("c").size(), d2 = j.at("b").at(0).size();
  return make_realization(MatC::Zero(d1, d2), fixture_matrix(j.at("c")), fixture_matrix(j.at("j")),
                          std::move(a), fixture_matrix(j.at("b")));
}

TEST(Realization, DescriptorExampleMatchesMatrixInverse) {
  Realization re = from_fixture(testing::load_fixture("matrat.json").at("descriptor"));
  EXPECT_TRUE(re.is_monic());
  EXPECT_TRUE(re.is_selfadjoint());
  Rng rng = make_rng({31});
  MatTuple x = random_hermitian_tuple(2, 3, rng);
  for (MatC& xi : x) xi *= 0.3;
  const Index n = 3;
  MatC m(2 * n, 2 * n);
  m << MatC::Identity(n, n) - x[0], -x[1], -x[1], MatC::Identity(n, n) - x[0];
  EXPECT_LT(rel_diff(eval_realization(re, x), m.inverse().topLeftCorner(n, n)), 1e-12);
}

TEST(Realization, RationalDistrFixtureRepresentsExpression) {
  nlohmann::json fx = testing::load_fixture("rational_distr.json");
  Realization re = from_fixture(fx.at("realization"));
  NcExpr r = parse_expr(fx.at("expression").get<std::string>(), 2);
  Rng rng = make_rng({32});
  for (Index n : {1, 2, 3}) {
    MatTuple x = random_hermitian_tuple(2, n, rng);
    EXPECT_LT(rel_diff(eval_realization(re, x), eval_expr(r, x)), 1e-10);
  }
}

TEST(Realization, RationalBrownFixtureRepresentsExpression) {
  nlohmann::json fx = testing::load_fixture("rational_brown.json");
  Realization re = from_fixture(fx.at("realization"));
  NcExpr r = parse_expr(fx.at("expression").get<std::string>(), 2);
  Rng rng = make_rng({33});
  for (Index n : {1, 2, 3}) {
    MatTuple x = random_hermitian_tuple(2, n, rng);
    EXPECT_LT(rel_diff(eval_realization(re, x), eval_expr(r, x)), 1e-10);
  }
}

TEST(Realization, SeriesCoefficientConvention) {
  Realization re = from_fixture(testing::load_fixture("matrat.json").at("descriptor"));
  // (1 - x1 - x2)^-1 style: coefficient of x1 is C A1 B, of x2 x2 is C A2 A2 B
  EXPECT_NEAR(std::abs(realization_series_coeff(re, {})(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(realization_series_coeff(re, {1})(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(realization_series_coeff(re, {2})(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(realization_series_coeff(re, {2, 2})(0, 0) - 1.0), 0.0, 1e-15);
  SeriesTable s = series_expand(
      parse_expr("inv(1-x1)+inv(1-x1)*x2*inv((1-x1)-x2*inv(1-x1)*x2)*x2*inv(1-x1)", 2), 5, 2);
  for (const Word& w : all_words(2, 5))
    EXPECT_LT(std::abs(realization_series_coeff(re, w)(0, 0) - s.coeff(w)), 1e-12);
}

TEST(Realization, ValidateRejectsBadSignature) {
  MatC j = MatC::Identity(2, 2) * 2.0;
  Realization re{MatC::Zero(1, 1), MatC::Ones(1, 2), j, {MatC::Zero(2, 2)}, MatC::Ones(2, 1)};
  try {
    re.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSignature);
  }
}

TEST(Realization, CutDownRemovesUnreachableStates) {
  Realization re = from_fixture(testing::load_fixture("matrat.json").at("descriptor"));
  // pad with a decoupled state that B never reaches
  Realization big = re;
  big.j = MatC::Identity(3, 3);
  big.c = MatC::Zero(1, 3);
  big.c.leftCols(2) = re.c;
  big.c(0, 2) = 5.0;
  big.b = MatC::Zero(3, 1);
  big.b.topRows(2) = re.b;
  for (int k = 0; k < 2; ++k) {
    big.a[k] = MatC::Zero(3, 3);
    big.a[k].topLeftCorner(2, 2) = re.a[k];
    big.a[k](2, 2) = 0.5;
  }
  Realization small = cut_down(big);
  EXPECT_EQ(small.state_dim(), 2);
  for (const Word& w : all_words(2, 4))
    EXPECT_LT(max_norm(realization_series_coeff(small, w) - realization_series_coeff(big, w)),
              1e-12);
}

TEST(Realization, CutDownFromFlr) {
  NcExpr r = parse_expr("x1*inv(1-x2*x1)", 2);
  Realization re = flr_to_realization(build_flr(r, 2), MatC::Zero(1, 1));
  Realization m = cut_down(re);
  EXPECT_LE(m.state_dim(), re.state_dim());
  EXPECT_EQ(numerical_rank(controllable_space(m)), m.state_dim());
  EXPECT_EQ(unobservable_space(m).cols(), 0);
  // x1 (1 - x2 x1)^-1 needs exactly two states
  EXPECT_EQ(m.state_dim(), 2);
}

TEST(Realization, SimilarityOfTwoMinimalRealizations) {
  Realization a = cut_down(flr_to_realization(build_flr(parse_expr("x1*inv(1-x2*x1)", 2), 2),
                                              MatC::Zero(1, 1)));
  Realization b = cut_down(flr_to_realization(build_flr(parse_expr("inv(1-x1*x2)*x1", 2), 2),
                                              MatC::Zero(1, 1)));
  auto s = check_similarity(a, b);
  ASSERT_TRUE(s.has_value());
  for (int j = 0; j < 2; ++j) EXPECT_LT(max_norm(*s * a.a[j] - b.a[j] * *s), 1e-9);
  EXPECT_LT(max_norm(*s * a.b - b.b), 1e-9);
  EXPECT_LT(max_norm(a.c - b.c * *s), 1e-9);

  Realization c = cut_down(flr_to_realization(build_flr(parse_expr("x2*inv(1-x1*x2)", 2), 2),
                                              MatC::Zero(1, 1)));
  EXPECT_FALSE(check_similarity(a, c).has_value());
}

TEST(Realization, SysMatrixShape) {
  Realization re = from_fixture(testing::load_fixture("matrat.json").at("descriptor"));
  LinearPencil s = sys_matrix(re);
  EXPECT_EQ(s.rows(), 3);
  EXPECT_EQ(s.cols(), 3);
  EXPECT_EQ(s.arity(), 2);
}

TEST(Realization, CutDownKeepsDomain) {
  Rng rng = make_rng({34});
  testing::AstOptions opts;
  opts.max_depth = 4;
  opts.arity = 2;
  for (int k = 0; k < 10; ++k) {
    NcExpr r = testing::random_regular_ast(rng, opts);
    Realization re = realization_of(r, 2);
    Realization m = cut_down(re);
    for (int j = 0; j < 10; ++j) {
      MatTuple x = random_tuple(2, 1 + j % 3, rng);
      MatC full;
      try {
        full = eval_realization(re, x);
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::DomainError);
        continue;
      }
      EXPECT_LT(rel_diff(eval_realization(m, x), full), 1e-8) << r.str();
    }
  }
}

TEST(Realization, SimilarityRecoversConjugation) {
  Realization m = cut_down(realization_of(parse_expr("inv(2 - x1*x2) + x2*x1*x2", 2), 2));
  const Index n = m.state_dim();
  ASSERT_GT(n, 0);
  Rng rng = make_rng({35});
  MatC t = random_gaussian(n, n, rng) + 2.0 * MatC::Identity(n, n);
  MatC ti = t.inverse();
  Realization c = m;
  for (MatC& a : c.a) a = t * a * ti;
  c.b = t * m.b;
  c.c = m.c * ti;
  auto s = check_similarity(m, c);
  ASSERT_TRUE(s.has_value());
  EXPECT_LT(max_norm(*s - t), 1e-7 * max_norm(t));
}

TEST(Realization, FeedThroughIsValueAtZero) {
  Realization re = realization_of(parse_expr("3 + x1*inv(2-x2)", 2), 2);
  EXPECT_EQ(re.d(0, 0), Complex(3, 0));
  Realization lin = realization_of(parse_expr("x1 - 2*x2", 2), 2);
  EXPECT_EQ(lin.d(0, 0), Complex(0, 0));
}

}  // namespace
}  // namespace ncrat
