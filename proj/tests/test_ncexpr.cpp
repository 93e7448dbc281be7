#include <gtest/gtest.h>

#include "ncrat/errors.hpp"
#include "ncrat/ncexpr.hpp"
#include "support/oracles.hpp"

namespace ncrat {
namespace {

using testing::rel_diff;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

TEST(Parser, PrecedenceAndLiterals) {
  MatTuple x{MatC::Constant(1, 1, 2.0), MatC::Constant(1, 1, 3.0)};
  EXPECT_EQ(eval_expr(parse_expr("1+x1*x2", 2), x)(0, 0), Complex(7, 0));
  EXPECT_EQ(eval_expr(parse_expr("-x1-x2", 2), x)(0, 0), Complex(-5, 0));
  EXPECT_EQ(eval_expr(parse_expr("(1+2i)*x1", 2), x)(0, 0), Complex(2, 4));
  EXPECT_EQ(eval_expr(parse_expr("4i*x2", 2), x)(0, 0), Complex(0, 12));
  EXPECT_EQ(eval_expr(parse_expr("x{2}*i", 2), x)(0, 0), Complex(0, 3));
  EXPECT_EQ(eval_expr(parse_expr("2.5e-1", 2), x)(0, 0), Complex(0.25, 0));
  EXPECT_NEAR(eval_expr(parse_expr("inv(x1)", 2), x)(0, 0).real(), 0.5, 1e-15);
  EXPECT_EQ(eval_expr(parse_expr("adj(2i*x1)", 2), x)(0, 0), Complex(0, -4));
}

TEST(Parser, Errors) {
  EXPECT_EQ(code_of([] { parse_expr("x1 +", 2); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { parse_expr("inv()", 2); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { parse_expr("x0", 2); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { parse_expr("(x1", 2); }), ErrorCode::SyntaxError);
  EXPECT_EQ(code_of([] { parse_expr("x3", 2); }), ErrorCode::ArityError);
}

TEST(Parser, SyntaxErrorReportsPosition) {
  try {
    parse_expr("x1 * ?", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.payload().at("position").get<int>(), 5);
  }
}

TEST(NcExpr, StrRoundTrips) {
  Rng rng = make_rng({11});
  testing::AstOptions opts;
  for (int k = 0; k < 50; ++k) {
    NcExpr r = testing::random_ast(rng, opts);
    NcExpr back = parse_expr(r.str(), opts.arity);
    MatTuple x = random_tuple(opts.arity, 2, rng);
    MatC a, b;
    try {
      a = eval_expr(r, x);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::DomainError);
      continue;
    }
    b = eval_expr(back, x);
    EXPECT_LT(rel_diff(a, b), 1e-10) << r.str();
  }
}

TEST(NcExpr, AdjointCollapses) {
  NcExpr x = NcExpr::var(1);
  EXPECT_TRUE(adj(adj(x)) == x);
  NcExpr e = parse_expr("x1*x2 + 2i", 2);
  NcExpr s = adjoint_expr(e);
  Rng rng = make_rng({12});
  MatTuple h = random_hermitian_tuple(2, 3, rng);
  EXPECT_LT(rel_diff(eval_expr(s, h), eval_expr(e, h).adjoint()), 1e-13);
}

TEST(Eval, DomainErrorPath) {
  NcExpr e = parse_expr("x1 + inv(x2 - x2)", 2);
  MatTuple x{MatC::Identity(2, 2), MatC::Identity(2, 2)};
  try {
    eval_expr(e, x);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DomainError);
    EXPECT_TRUE(err.payload().contains("path"));
  }
}

TEST(Eval, MatrixUnitsAreNotCommutative) {
  MatC e12 = MatC::Zero(2, 2), e21 = MatC::Zero(2, 2);
  e12(0, 1) = 1;
  e21(1, 0) = 1;
  NcExpr c = parse_expr("x1*x2 - x2*x1", 2);
  MatC v = eval_expr(c, {e12, e21});
  EXPECT_EQ(v(0, 0), Complex(1, 0));
  EXPECT_EQ(v(1, 1), Complex(-1, 0));
}

TEST(Eval, MatrixExpression) {
  MatNcExpr m(2, 2, {parse_expr("1-x1", 2), parse_expr("-x2", 2), parse_expr("-x2", 2),
                     parse_expr("1-x1", 2)});
  Rng rng = make_rng({13});
  MatTuple x = random_hermitian_tuple(2, 2, rng);
  MatC v = eval_mat_expr(m, x);
  EXPECT_EQ(v.rows(), 4);
  EXPECT_LT(max_norm(v.topLeftCorner(2, 2) - (MatC::Identity(2, 2) - x[0])), 1e-15);
  EXPECT_LT(max_norm(v.topRightCorner(2, 2) + x[1]), 1e-15);
}

TEST(Series, GeometricSeries) {
  // x1 (1 - x2 x1)^-1 = sum_k (x1 x2)^k x1
  SeriesTable s = series_expand(parse_expr("x1*inv(1-x2*x1)", 2), 6, 2);
  for (const Word& w : all_words(2, 6)) {
    bool alternating = w.size() % 2 == 1;
    for (std::size_t i = 0; alternating && i < w.size(); ++i)
      alternating = w[i] == (i % 2 == 0 ? 1 : 2);
    EXPECT_EQ(s.coeff(w), Complex(alternating ? 1.0 : 0.0, 0.0));
  }
}

TEST(Series, WordsCount) {
  EXPECT_EQ(all_words(2, 3).size(), 1u + 2u + 4u + 8u);
  EXPECT_TRUE(all_words(3, 2).front().empty());
}

TEST(Series, NotRegularAtZero) {
  EXPECT_EQ(code_of([] { series_expand(parse_expr("inv(x1)", 1), 3, 1); }),
            ErrorCode::NotRegularAtZero);
  EXPECT_FALSE(value_at_zero(parse_expr("inv(x1)", 1)).has_value());
  EXPECT_EQ(*value_at_zero(parse_expr("inv(2-x1)", 1)), Complex(0.5, 0));
}

TEST(Series, MatchesEvaluationNearZero) {
  NcExpr r = parse_expr("inv(2 - x1*x2 - x2) * x1", 2);
  SeriesTable s = series_expand(r, 12, 2);
  Rng rng = make_rng({14});
  MatTuple x = random_tuple(2, 2, rng);
  for (MatC& xi : x) xi *= 0.05;
  EXPECT_LT(rel_diff(eval_series(s, x), eval_expr(r, x)), 1e-9);
}

TEST(Equiv, FixtureVerdicts) {
  nlohmann::json fx = testing::load_fixture("equivalences.json");
  for (const auto& c : fx.at("cases")) {
    const int arity = c.at("arity");
    EquivOptions opts;
    opts.sizes = c.at("sizes").get<std::vector<Index>>();
    opts.trials = c.at("trials");
    opts.seed = c.at("seed");
    EquivResult res = matrix_equiv(parse_expr(c.at("lhs").get<std::string>(), arity),
                                   parse_expr(c.at("rhs").get<std::string>(), arity), arity, opts);
    EXPECT_EQ(to_string(res.verdict), c.at("verdict").get<std::string>()) << c.at("name");
    if (res.verdict == Verdict::Distinguished) EXPECT_TRUE(res.witness.has_value());
  }
}

TEST(Equiv, DistinguishesCommutator) {
  EquivResult res = matrix_equiv(parse_expr("x1*x2", 2), parse_expr("x2*x1", 2), 2);
  EXPECT_EQ(res.verdict, Verdict::Distinguished);
  ASSERT_TRUE(res.witness.has_value());
  EXPECT_GE(tuple_dim(*res.witness), 2);
}

TEST(Equiv, EmptyDomainIsInconclusive) {
  EquivResult res = matrix_equiv(parse_expr("inv(x1-x1)", 1), parse_expr("0", 1), 1);
  EXPECT_EQ(res.verdict, Verdict::Inconclusive);
  EXPECT_EQ(res.in_domain, 0);
}

TEST(NcExpr, PrintParseIsIdentity) {
  Rng rng = make_rng({15});
  testing::AstOptions opts;
  for (int k = 0; k < 200; ++k) {
    NcExpr r = testing::random_ast(rng, opts);
    EXPECT_TRUE(parse_expr(r.str(), opts.arity) == r) << r.str();
  }
}

TEST(Eval, Homomorphism) {
  Rng rng = make_rng({16});
  testing::AstOptions opts;
  opts.max_depth = 3;
  int checked = 0;
  for (int k = 0; k < 100; ++k) {
    NcExpr a = testing::random_ast(rng, opts), b = testing::random_ast(rng, opts);
    MatTuple x = random_tuple(opts.arity, 1 + k % 3, rng);
    try {
      MatC va = eval_expr(a, x), vb = eval_expr(b, x);
      EXPECT_LT(rel_diff(eval_expr(a + b, x), va + vb), 1e-10);
      EXPECT_LT(rel_diff(eval_expr(a * b, x), va * vb), 1e-10);
      ++checked;
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::DomainError);
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(NcExpr, AdjointIsInvolution) {
  Rng rng = make_rng({17});
  testing::AstOptions opts;
  for (int k = 0; k < 100; ++k) {
    NcExpr r = testing::random_ast(rng, opts);
    MatTuple x = random_hermitian_tuple(opts.arity, 2, rng);
    try {
      MatC v = eval_expr(r, x);
      EXPECT_LT(rel_diff(eval_expr(adjoint_expr(adjoint_expr(r)), x), v), 1e-10);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::DomainError);
    }
  }
}

TEST(Series, DegreeEightNearZero) {
  Rng rng = make_rng({18});
  testing::AstOptions opts;
  opts.max_depth = 4;
  for (int k = 0; k < 20; ++k) {
    NcExpr r = testing::random_regular_ast(rng, opts);
    SeriesTable s = series_expand(r, 8, opts.arity);
    MatTuple x = random_tuple(opts.arity, 2, rng);
    for (MatC& xi : x) xi *= 0.1 / std::max(1e-12, xi.operatorNorm());
    EXPECT_LT(rel_diff(eval_series(s, x), eval_expr(r, x)), 1e-6) << r.str();
  }
}

}  // namespace
}  // namespace ncrat
