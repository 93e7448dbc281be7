#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncrat/linalg.hpp"
#include "ncrat/pencil.hpp"

namespace ncrat {

// Immutable noncommutative rational expression. Copies share the tree.
class NcExpr {
 public:
  enum class Kind { Const, Var, Add, Mul, Inv, Adj };

  NcExpr();  // the constant 0

  static NcExpr constant(Complex c);
  static NcExpr var(int index);  // 1-based
  static NcExpr add(const NcExpr& a, const NcExpr& b);
  static NcExpr mul(const NcExpr& a, const NcExpr& b);
  static NcExpr inv(const NcExpr& a);
  // adj(adj(e)) collapses to e.
  static NcExpr adj(const NcExpr& a);

  Kind kind() const;
  Complex value() const;
  int index() const;
  const NcExpr& lhs() const;  // Add/Mul left operand, Inv/Adj child
  const NcExpr& rhs() const;
  const NcExpr& child() const { return lhs(); }

  int max_var() const;
  std::size_t node_count() const;
  int depth() const;
  bool has_inverse() const;

  bool same_tree(const NcExpr& other) const;
  // Fully parenthesized normal form.
  std::string str() const;

  struct Node;  // defined in the implementation

 private:
  explicit NcExpr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

NcExpr operator+(const NcExpr& a, const NcExpr& b);
NcExpr operator-(const NcExpr& a, const NcExpr& b);
NcExpr operator-(const NcExpr& a);
NcExpr operator*(const NcExpr& a, const NcExpr& b);
NcExpr operator*(Complex c, const NcExpr& a);
NcExpr inv(const NcExpr& a);
NcExpr adj(const NcExpr& a);
inline bool operator==(const NcExpr& a, const NcExpr& b) { return a.same_tree(b); }

// Rectangular grid of expressions.
class MatNcExpr {
 public:
  MatNcExpr() = default;
  MatNcExpr(Index rows, Index cols);
  MatNcExpr(Index rows, Index cols, std::vector<NcExpr> entries);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const NcExpr& at(Index i, Index j) const { return entries_.at(i * cols_ + j); }
  NcExpr& at(Index i, Index j) { return entries_.at(i * cols_ + j); }
  int max_var() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<NcExpr> entries_;
};

NcExpr parse_expr(std::string_view text, int arity);

// Evaluation at a matrix point. Throws DomainError with the child path
// (0 = left/only child, 1 = right child) of the failing inverse.
MatC eval_expr(const NcExpr& r, const MatTuple& x);
MatC eval_mat_expr(const MatNcExpr& r, const MatTuple& x);

// Structural adjoint: products reverse, constants conjugate, variables fixed.
NcExpr adjoint_expr(const NcExpr& r);

// r(0) if r is regular at zero.
std::optional<Complex> value_at_zero(const NcExpr& r);

using Word = std::vector<int>;  // 1-based variable indices, left to right

// Truncated formal power series: coefficient of x_{w1} x_{w2} ... x_{wk}.
struct SeriesTable {
  int arity = 0;
  int degree = 0;
  std::map<Word, Complex> coeffs;

  Complex coeff(const Word& w) const;
};

SeriesTable series_expand(const NcExpr& r, int degree, int arity);
MatC eval_series(const SeriesTable& s, const MatTuple& x);

// All words of length <= max_len over {1..arity}, shortest first.
std::vector<Word> all_words(int arity, int max_len);

enum class Verdict { Equivalent, Distinguished, Inconclusive };
std::string_view to_string(Verdict v);

struct EquivOptions {
  std::vector<Index> sizes{1, 2, 3, 4};
  int trials = 20;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

struct EquivResult {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<MatTuple> witness;
  int in_domain = 0;
  int total = 0;
  double max_deviation = 0.0;
};

EquivResult matrix_equiv(const NcExpr& r1, const NcExpr& r2, int arity,
                         const EquivOptions& opts = {});

MatTuple random_tuple(int arity, Index n, Rng& rng);
MatTuple random_hermitian_tuple(int arity, Index n, Rng& rng);

}  // namespace ncrat
