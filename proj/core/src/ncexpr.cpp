#include "ncrat/ncexpr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ncrat/errors.hpp"

namespace ncrat {

struct NcExpr::Node {
  Kind kind = Kind::Const;
  Complex value{0.0, 0.0};
  int index = 0;
  // children held as handles so lhs()/rhs() can return references
  std::unique_ptr<NcExpr> left;
  std::unique_ptr<NcExpr> right;
  int max_var = 0;
  std::size_t count = 1;
  int depth = 1;
  bool has_inv = false;
};

NcExpr::NcExpr() : NcExpr(constant(0.0)) {}

NcExpr::NcExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

NcExpr NcExpr::constant(Complex c) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = c;
  return NcExpr(std::move(n));
}

NcExpr NcExpr::var(int index) {
  if (index < 1) {
    throw Error(ErrorCode::ArityError, "ncexpr", "variable index must be positive",
                {{"index", index}});
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->index = index;
  n->max_var = index;
  return NcExpr(std::move(n));
}

namespace {

std::shared_ptr<NcExpr::Node> binary(NcExpr::Kind kind, const NcExpr& a, const NcExpr& b) {
  auto n = std::make_shared<NcExpr::Node>();
  n->kind = kind;
  n->left = std::make_unique<NcExpr>(a);
  n->right = std::make_unique<NcExpr>(b);
  n->max_var = std::max(a.max_var(), b.max_var());
  n->count = 1 + a.node_count() + b.node_count();
  n->depth = 1 + std::max(a.depth(), b.depth());
  n->has_inv = a.has_inverse() || b.has_inverse();
  return n;
}

std::shared_ptr<NcExpr::Node> unary(NcExpr::Kind kind, const NcExpr& a) {
  auto n = std::make_shared<NcExpr::Node>();
  n->kind = kind;
  n->left = std::make_unique<NcExpr>(a);
  n->max_var = a.max_var();
  n->count = 1 + a.node_count();
  n->depth = 1 + a.depth();
  n->has_inv = kind == NcExpr::Kind::Inv || a.has_inverse();
  return n;
}

}  // namespace

NcExpr NcExpr::add(const NcExpr& a, const NcExpr& b) { return NcExpr(binary(Kind::Add, a, b)); }
NcExpr NcExpr::mul(const NcExpr& a, const NcExpr& b) { return NcExpr(binary(Kind::Mul, a, b)); }
NcExpr NcExpr::inv(const NcExpr& a) { return NcExpr(unary(Kind::Inv, a)); }

NcExpr NcExpr::adj(const NcExpr& a) {
  if (a.kind() == Kind::Adj) return a.child();
  return NcExpr(unary(Kind::Adj, a));
}

NcExpr::Kind NcExpr::kind() const { return node_->kind; }
Complex NcExpr::value() const { return node_->value; }
int NcExpr::index() const { return node_->index; }

const NcExpr& NcExpr::lhs() const {
  if (!node_->left) throw Error(ErrorCode::ShapeMismatch, "ncexpr", "leaf has no children");
  return *node_->left;
}

const NcExpr& NcExpr::rhs() const {
  if (!node_->right) throw Error(ErrorCode::ShapeMismatch, "ncexpr", "node has no right child");
  return *node_->right;
}

int NcExpr::max_var() const { return node_->max_var; }
std::size_t NcExpr::node_count() const { return node_->count; }
int NcExpr::depth() const { return node_->depth; }
bool NcExpr::has_inverse() const { return node_->has_inv; }

bool NcExpr::same_tree(const NcExpr& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::Const: {
      // bitwise comparison so that -0 and 0 stay distinct trees
      const Complex a = value(), b = other.value();
      return std::signbit(a.real()) == std::signbit(b.real()) &&
             std::signbit(a.imag()) == std::signbit(b.imag()) && a == b;
    }
    case Kind::Var: return index() == other.index();
    case Kind::Add:
    case Kind::Mul: return lhs().same_tree(other.lhs()) && rhs().same_tree(other.rhs());
    case Kind::Inv:
    case Kind::Adj: return child().same_tree(other.child());
  }
  return false;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print(const NcExpr& e, std::string& out) {
  using K = NcExpr::Kind;
  switch (e.kind()) {
    case K::Const: {
      const Complex c = e.value();
      if (c.imag() == 0.0 && !std::signbit(c.imag())) {
        out += fmt_double(c.real());
      } else {
        out += '(';
        out += fmt_double(c.real());
        out += std::signbit(c.imag()) ? '-' : '+';
        out += fmt_double(std::abs(c.imag()));
        out += "i)";
      }
      return;
    }
    case K::Var:
      if (e.index() < 10) {
        out += 'x';
        out += std::to_string(e.index());
      } else {
        out += "x{" + std::to_string(e.index()) + "}";
      }
      return;
    case K::Add:
    case K::Mul:
      out += '(';
      print(e.lhs(), out);
      out += e.kind() == K::Add ? '+' : '*';
      print(e.rhs(), out);
      out += ')';
      return;
    case K::Inv:
    case K::Adj:
      out += e.kind() == K::Inv ? "inv(" : "adj(";
      print(e.child(), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string NcExpr::str() const {
  std::string out;
  print(*this, out);
  return out;
}

NcExpr operator+(const NcExpr& a, const NcExpr& b) { return NcExpr::add(a, b); }
NcExpr operator-(const NcExpr& a, const NcExpr& b) {
  return NcExpr::add(a, NcExpr::mul(NcExpr::constant(-1.0), b));
}
NcExpr operator-(const NcExpr& a) { return NcExpr::mul(NcExpr::constant(-1.0), a); }
NcExpr operator*(const NcExpr& a, const NcExpr& b) { return NcExpr::mul(a, b); }
NcExpr operator*(Complex c, const NcExpr& a) { return NcExpr::mul(NcExpr::constant(c), a); }
NcExpr inv(const NcExpr& a) { return NcExpr::inv(a); }
NcExpr adj(const NcExpr& a) { return NcExpr::adj(a); }

MatNcExpr::MatNcExpr(Index rows, Index cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, NcExpr::constant(0.0)) {}

MatNcExpr::MatNcExpr(Index rows, Index cols, std::vector<NcExpr> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (static_cast<Index>(entries_.size()) != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch, "ncexpr", "grid size does not match shape");
  }
}

int MatNcExpr::max_var() const {
  int m = 0;
  for (const auto& e : entries_) m = std::max(m, e.max_var());
  return m;
}

namespace {

std::string path_string(const std::vector<int>& path) {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(path[i]);
  }
  return s;
}

struct Evaluator {
  const MatTuple& x;
  Index n;
  std::vector<int> path;

  // conj: evaluate at X* instead of X
  MatC run(const NcExpr& e, bool conj) {
    using K = NcExpr::Kind;
    switch (e.kind()) {
      case K::Const: return e.value() * MatC::Identity(n, n);
      case K::Var: {
        if (e.index() > static_cast<int>(x.size())) {
          throw Error(ErrorCode::ArityError, "ncexpr", "variable index exceeds tuple arity",
                      {{"index", e.index()}, {"arity", x.size()}});
        }
        const MatC& m = x[e.index() - 1];
        return conj ? MatC(m.adjoint()) : m;
      }
      case K::Add: {
        path.push_back(0);
        MatC a = run(e.lhs(), conj);
        path.back() = 1;
        MatC b = run(e.rhs(), conj);
        path.pop_back();
        return a + b;
      }
      case K::Mul: {
        path.push_back(0);
        if (e.lhs().kind() == K::Const) {
          path.back() = 1;
          MatC b = run(e.rhs(), conj);
          path.pop_back();
          return e.lhs().value() * b;
        }
        MatC a = run(e.lhs(), conj);
        path.back() = 1;
        MatC b = run(e.rhs(), conj);
        path.pop_back();
        return a * b;
      }
      case K::Inv: {
        path.push_back(0);
        MatC a = run(e.child(), conj);
        path.pop_back();
        auto ai = try_inverse(a);
        if (!ai) {
          throw Error(ErrorCode::DomainError, "ncexpr", "point outside the domain",
                      {{"path", path_string(path)},
                       {"inverse_condition", inverse_condition(a)},
                       {"tolerance", kInvertibilityTol}});
        }
        return std::move(*ai);
      }
      case K::Adj: {
        path.push_back(0);
        MatC a = run(e.child(), !conj);
        path.pop_back();
        return a.adjoint();
      }
    }
    return {};
  }
};

}  // namespace

MatC eval_expr(const NcExpr& r, const MatTuple& x) {
  Evaluator ev{x, tuple_dim(x), {}};
  return ev.run(r, false);
}

MatC eval_mat_expr(const MatNcExpr& r, const MatTuple& x) {
  const Index n = tuple_dim(x);
  MatC out(r.rows() * n, r.cols() * n);
  for (Index i = 0; i < r.rows(); ++i) {
    for (Index j = 0; j < r.cols(); ++j) {
      try {
        out.block(i * n, j * n, n, n) = eval_expr(r.at(i, j), x);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::DomainError) throw;
        nlohmann::json p = err.payload();
        p["entry"] = {i, j};
        throw Error(ErrorCode::DomainError, "ncexpr", "point outside the domain of an entry", p);
      }
    }
  }
  return out;
}

NcExpr adjoint_expr(const NcExpr& r) {
  using K = NcExpr::Kind;
  switch (r.kind()) {
    case K::Const: return NcExpr::constant(std::conj(r.value()));
    case K::Var: return r;
    case K::Add: return NcExpr::add(adjoint_expr(r.lhs()), adjoint_expr(r.rhs()));
    case K::Mul: return NcExpr::mul(adjoint_expr(r.rhs()), adjoint_expr(r.lhs()));
    case K::Inv: return NcExpr::inv(adjoint_expr(r.child()));
    case K::Adj: return r.child();
  }
  return r;
}

std::optional<Complex> value_at_zero(const NcExpr& r) {
  using K = NcExpr::Kind;
  switch (r.kind()) {
    case K::Const: return r.value();
    case K::Var: return Complex(0.0);
    case K::Add:
    case K::Mul: {
      auto a = value_at_zero(r.lhs());
      if (!a) return std::nullopt;
      auto b = value_at_zero(r.rhs());
      if (!b) return std::nullopt;
      return r.kind() == K::Add ? *a + *b : *a * *b;
    }
    case K::Inv: {
      auto a = value_at_zero(r.child());
      if (!a || std::abs(*a) <= kInvertibilityTol) return std::nullopt;
      return 1.0 / *a;
    }
    case K::Adj: {
      auto a = value_at_zero(r.child());
      if (!a) return std::nullopt;
      return std::conj(*a);
    }
  }
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "equivalent";
    case Verdict::Distinguished: return "distinguished";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

MatTuple random_tuple(int arity, Index n, Rng& rng) {
  MatTuple x;
  x.reserve(arity);
  for (int j = 0; j < arity; ++j) x.push_back(random_gaussian(n, n, rng));
  return x;
}

MatTuple random_hermitian_tuple(int arity, Index n, Rng& rng) {
  MatTuple x;
  x.reserve(arity);
  for (int j = 0; j < arity; ++j) x.push_back(random_hermitian(n, rng));
  return x;
}

EquivResult matrix_equiv(const NcExpr& r1, const NcExpr& r2, int arity,
                         const EquivOptions& opts) {
  EquivResult res;
  const int trials = std::max(opts.trials, 1);
  for (Index n : opts.sizes) {
    for (int t = 0; t < trials; ++t) {
      Rng rng = make_rng({opts.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t)});
      MatTuple x = random_tuple(arity, n, rng);
      ++res.total;
      MatC a, b;
      try {
        a = eval_expr(r1, x);
        b = eval_expr(r2, x);
      } catch (const Error& err) {
        if (err.code() == ErrorCode::DomainError) continue;
        throw;
      }
      ++res.in_domain;
      const double dev = max_norm(a - b);
      const double rel = dev / (1.0 + max_norm(a));
      res.max_deviation = std::max(res.max_deviation, rel);
      if (rel > opts.tol) {
        res.verdict = Verdict::Distinguished;
        res.witness = std::move(x);
        return res;
      }
    }
  }
  res.verdict = res.in_domain > 0 ? Verdict::Equivalent : Verdict::Inconclusive;
  return res;
}

}  // namespace ncrat
