#include "ncrat/linrep.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "ncrat/errors.hpp"

namespace ncrat {

namespace {

void require_arity(const Flr& a, const Flr& b) {
  if (a.arity() != b.arity()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "representations differ in arity",
                {{"left", a.arity()}, {"right", b.arity()}});
  }
}

// Affine coefficients (lambda_0..lambda_g) when r is affine in x.
std::optional<std::vector<Complex>> affine_coeffs(const NcExpr& r, int arity) {
  using K = NcExpr::Kind;
  auto is_const = [](const std::vector<Complex>& c) {
    return std::all_of(c.begin() + 1, c.end(), [](Complex z) { return z == Complex(0.0); });
  };
  switch (r.kind()) {
    case K::Const: {
      std::vector<Complex> c(arity + 1, 0.0);
      c[0] = r.value();
      return c;
    }
    case K::Var: {
      if (r.index() > arity) {
        throw Error(ErrorCode::ArityError, "linrep", "variable index exceeds arity",
                    {{"index", r.index()}, {"arity", arity}});
      }
      std::vector<Complex> c(arity + 1, 0.0);
      c[r.index()] = 1.0;
      return c;
    }
    case K::Add: {
      auto a = affine_coeffs(r.lhs(), arity);
      if (!a) return std::nullopt;
      auto b = affine_coeffs(r.rhs(), arity);
      if (!b) return std::nullopt;
      for (int j = 0; j <= arity; ++j) (*a)[j] += (*b)[j];
      return a;
    }
    case K::Mul: {
      auto a = affine_coeffs(r.lhs(), arity);
      if (!a) return std::nullopt;
      auto b = affine_coeffs(r.rhs(), arity);
      if (!b) return std::nullopt;
      if (is_const(*a)) {
        for (auto& z : *b) z *= (*a)[0];
        return b;
      }
      if (is_const(*b)) {
        for (auto& z : *a) z *= (*b)[0];
        return a;
      }
      return std::nullopt;
    }
    case K::Inv: {
      auto a = affine_coeffs(r.child(), arity);
      if (!a || !is_const(*a) || std::abs((*a)[0]) <= kInvertibilityTol) return std::nullopt;
      std::vector<Complex> c(arity + 1, 0.0);
      c[0] = 1.0 / (*a)[0];
      return c;
    }
    case K::Adj: {
      auto a = affine_coeffs(r.child(), arity);
      if (!a) return std::nullopt;
      for (auto& z : *a) z = std::conj(z);
      return a;
    }
  }
  return std::nullopt;
}

Flr build_scalar(const NcExpr& r, int arity) {
  using K = NcExpr::Kind;
  if (auto c = affine_coeffs(r, arity)) return flr_affine(*c);
  switch (r.kind()) {
    case K::Add: return flr_add(build_scalar(r.lhs(), arity), build_scalar(r.rhs(), arity));
    case K::Mul: {
      auto a = affine_coeffs(r.lhs(), arity);
      if (a && std::all_of(a->begin() + 1, a->end(), [](Complex z) { return z == Complex(0.0); }))
        return flr_scale((*a)[0], build_scalar(r.rhs(), arity));
      auto b = affine_coeffs(r.rhs(), arity);
      if (b && std::all_of(b->begin() + 1, b->end(), [](Complex z) { return z == Complex(0.0); }))
        return flr_scale((*b)[0], build_scalar(r.lhs(), arity));
      return flr_mul(build_scalar(r.lhs(), arity), build_scalar(r.rhs(), arity));
    }
    case K::Inv: return flr_inv(build_scalar(r.child(), arity));
    case K::Adj: return flr_adjoint(build_scalar(r.child(), arity));
    default: break;
  }
  throw Error(ErrorCode::ShapeMismatch, "linrep", "unreachable expression kind");
}

// Rows i matched to columns match[i] in the joint nonzero pattern; empty if none.
std::vector<Index> perfect_matching(const std::vector<std::vector<Index>>& adj, Index n) {
  std::vector<Index> row_of(n, -1), col_of(n, -1);
  std::vector<char> seen;
  std::function<bool(Index)> augment = [&](Index i) -> bool {
    for (Index c : adj[i]) {
      if (seen[c]) continue;
      seen[c] = 1;
      if (row_of[c] < 0 || augment(row_of[c])) {
        row_of[c] = i;
        col_of[i] = c;
        return true;
      }
    }
    return false;
  };
  for (Index i = 0; i < n; ++i) {
    seen.assign(n, 0);
    if (!augment(i)) return {};
  }
  return col_of;
}

}  // namespace

Flr flr_affine(std::span<const Complex> coeffs) {
  if (coeffs.empty()) throw Error(ErrorCode::ShapeMismatch, "linrep", "empty affine form");
  const int arity = static_cast<int>(coeffs.size()) - 1;
  LinearPencil q(arity, 2, 2);
  q.coeff(0) << coeffs[0], -1.0, -1.0, 0.0;
  for (int j = 1; j <= arity; ++j) q.coeff(j)(0, 0) = coeffs[j];
  MatC u(1, 2), v(2, 1);
  u << 0.0, 1.0;
  v << 0.0, 1.0;
  return {u, q, v};
}

Flr flr_affine(const LinearPencil& lambda) {
  const Index d1 = lambda.rows(), d2 = lambda.cols();
  LinearPencil q(lambda.arity(), d1 + d2, d1 + d2);
  for (int j = 0; j <= lambda.arity(); ++j) q.coeff(j).topLeftCorner(d1, d2) = lambda.coeff(j);
  q.coeff(0).topRightCorner(d1, d1) = -MatC::Identity(d1, d1);
  q.coeff(0).bottomLeftCorner(d2, d2) = -MatC::Identity(d2, d2);
  MatC u = MatC::Zero(d1, d1 + d2);
  u.rightCols(d1) = MatC::Identity(d1, d1);
  MatC v = MatC::Zero(d1 + d2, d2);
  v.bottomRows(d2) = MatC::Identity(d2, d2);
  return {u, q, v};
}

Flr flr_add(const Flr& a, const Flr& b) {
  require_arity(a, b);
  if (a.out_rows() != b.out_rows() || a.out_cols() != b.out_cols()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "summands differ in shape");
  }
  const Index n1 = a.size(), n2 = b.size();
  LinearPencil q(a.arity(), n1 + n2, n1 + n2);
  for (int j = 0; j <= a.arity(); ++j) q.coeff(j) = block_diag(a.q.coeff(j), b.q.coeff(j));
  MatC u(a.out_rows(), n1 + n2);
  u << a.u, b.u;
  MatC v(n1 + n2, a.out_cols());
  v << a.v, b.v;
  return {u, q, v};
}

Flr flr_mul(const Flr& a, const Flr& b) {
  require_arity(a, b);
  if (a.out_cols() != b.out_rows()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "factor shapes do not compose");
  }
  const Index n1 = a.size(), n2 = b.size();
  // rows (n1, n2), columns (n2, n1): [[v1 u2, Q1], [Q2, 0]]
  LinearPencil q(a.arity(), n1 + n2, n1 + n2);
  for (int j = 0; j <= a.arity(); ++j) {
    q.coeff(j).topRightCorner(n1, n1) = a.q.coeff(j);
    q.coeff(j).bottomLeftCorner(n2, n2) = b.q.coeff(j);
  }
  q.coeff(0).topLeftCorner(n1, n2) = a.v * b.u;
  MatC u = MatC::Zero(a.out_rows(), n1 + n2);
  u.rightCols(n1) = a.u;
  MatC v = MatC::Zero(n1 + n2, b.out_cols());
  v.bottomRows(n2) = b.v;
  return {u, q, v};
}

Flr flr_inv(const Flr& a) {
  if (a.out_rows() != a.out_cols()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "inverse of a non-square representation");
  }
  const Index d = a.out_rows(), n = a.size();
  LinearPencil q(a.arity(), d + n, d + n);
  for (int j = 0; j <= a.arity(); ++j) q.coeff(j).bottomRightCorner(n, n) = -a.q.coeff(j);
  q.coeff(0).topRightCorner(d, n) = a.u;
  q.coeff(0).bottomLeftCorner(n, d) = a.v;
  MatC u = MatC::Zero(d, d + n);
  u.leftCols(d) = MatC::Identity(d, d);
  MatC v = MatC::Zero(d + n, d);
  v.topRows(d) = MatC::Identity(d, d);
  return {u, q, v};
}

Flr flr_adjoint(const Flr& a) { return {a.v.adjoint(), a.q.adjoint(), a.u.adjoint()}; }

Flr flr_scale(Complex c, const Flr& a) { return {c * a.u, a.q, a.v}; }

Flr build_flr(const NcExpr& r, int arity) {
  if (r.max_var() > arity) {
    throw Error(ErrorCode::ArityError, "linrep", "expression uses more variables than arity",
                {{"max_var", r.max_var()}, {"arity", arity}});
  }
  return build_scalar(r, arity);
}

Flr build_flr(const MatNcExpr& r, int arity) {
  const Index d1 = r.rows(), d2 = r.cols();
  LinearPencil affine(arity, d1, d2);
  std::optional<Flr> acc;
  for (Index i = 0; i < d1; ++i) {
    for (Index k = 0; k < d2; ++k) {
      const NcExpr& e = r.at(i, k);
      if (e.max_var() > arity) {
        throw Error(ErrorCode::ArityError, "linrep", "entry uses more variables than arity",
                    {{"entry", {i, k}}, {"arity", arity}});
      }
      if (auto c = affine_coeffs(e, arity)) {
        for (int j = 0; j <= arity; ++j) affine.coeff(j)(i, k) = (*c)[j];
        continue;
      }
      const Flr s = build_scalar(e, arity);
      MatC u = MatC::Zero(d1, s.size());
      u.row(i) = s.u.row(0);
      MatC v = MatC::Zero(s.size(), d2);
      v.col(k) = s.v.col(0);
      Flr placed{u, s.q, v};
      acc = acc ? flr_add(*acc, placed) : placed;
    }
  }
  bool has_affine = false;
  for (int j = 0; j <= arity; ++j) has_affine = has_affine || !affine.coeff(j).isZero(0.0);
  if (!acc || has_affine) {
    Flr a = flr_affine(affine);
    acc = acc ? flr_add(a, *acc) : a;
  }
  return *acc;
}

SaFlr make_selfadjoint_flr(const Flr& rho, bool normalize_q0) {
  if (rho.out_rows() != rho.out_cols()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "selfadjoint doubling needs square values");
  }
  const Index n = rho.size(), d = rho.out_rows();
  LinearPencil q = rho.q;
  MatC v = rho.v;
  if (normalize_q0) {
    auto q0_inv = try_inverse(rho.q.coeff(0));
    if (!q0_inv) {
      throw Error(ErrorCode::SingularQ0, "linrep", "constant coefficient is not invertible",
                  {{"inverse_condition", inverse_condition(rho.q.coeff(0))}});
    }
    for (int j = 0; j <= q.arity(); ++j) q.coeff(j) = (*q0_inv) * rho.q.coeff(j);
    q.coeff(0) = MatC::Identity(n, n);
    v = (*q0_inv) * rho.v;
  }
  LinearPencil qs(q.arity(), 2 * n, 2 * n);
  for (int j = 0; j <= q.arity(); ++j) {
    qs.coeff(j).topRightCorner(n, n) = q.coeff(j).adjoint();
    qs.coeff(j).bottomLeftCorner(n, n) = q.coeff(j);
  }
  MatC vs(2 * n, d);
  vs << 0.5 * rho.u.adjoint(), v;
  return {qs, vs};
}

SaFlr hermitize_flr(const Flr& rho) {
  const Index n = rho.size(), d1 = rho.out_rows(), d2 = rho.out_cols();
  LinearPencil q(rho.arity(), 2 * n, 2 * n);
  for (int j = 0; j <= rho.arity(); ++j) {
    q.coeff(j).topRightCorner(n, n) = rho.q.coeff(j);
    q.coeff(j).bottomLeftCorner(n, n) = rho.q.coeff(j).adjoint();
  }
  MatC v = MatC::Zero(2 * n, d1 + d2);
  v.topRightCorner(n, d2) = rho.v;
  v.bottomLeftCorner(n, d1) = rho.u.adjoint();
  return {q, v};
}

Realization flr_to_realization(const Flr& rho, const MatC& d) {
  auto q0_inv = try_inverse(rho.q.coeff(0));
  if (!q0_inv) {
    throw Error(ErrorCode::SingularQ0, "linrep", "constant coefficient is not invertible",
                {{"inverse_condition", inverse_condition(rho.q.coeff(0))}});
  }
  if (d.rows() != rho.out_rows() || d.cols() != rho.out_cols()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "feed-through has the wrong shape");
  }
  const Index n = rho.size();
  Realization r;
  r.d = d;
  r.c = -rho.u;
  r.j = MatC::Identity(n, n);
  r.b = (*q0_inv) * rho.v;
  for (int j = 1; j <= rho.arity(); ++j) r.a.push_back(-(*q0_inv) * rho.q.coeff(j));
  return r;
}

Realization sa_flr_to_realization(const SaFlr& rho, const MatC& delta) {
  const Index n = rho.size();
  const MatC m0 = -rho.q.coeff(0);
  if (!is_invertible(m0)) {
    throw Error(ErrorCode::SingularQ0, "linrep", "constant coefficient is not invertible");
  }
  const double dev =
      std::max(max_norm(m0 * m0 - MatC::Identity(n, n)), max_norm(m0 - m0.adjoint()));
  if (dev > 1e-10) {
    throw Error(ErrorCode::NotSignature, "linrep", "constant coefficient is not a signature",
                {{"deviation", dev}});
  }
  if (delta.rows() != rho.v.cols() || delta.cols() != rho.v.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "feed-through has the wrong shape");
  }
  Realization r;
  r.d = delta;
  r.c = rho.v.adjoint();
  r.j = m0;
  r.b = rho.v;
  for (int j = 1; j <= rho.arity(); ++j) r.a.push_back(rho.q.coeff(j));
  return r;
}

Flr realization_to_flr(const Realization& r) {
  const Realization m = monic_form(r);
  const Index n = m.state_dim();
  LinearPencil q(m.arity(), n, n);
  q.coeff(0) = MatC::Identity(n, n);
  for (int j = 1; j <= m.arity(); ++j) q.coeff(j) = -m.a[j - 1];
  return {-m.c, q, m.b};
}

Flr prune_flr(const Flr& rho, std::uint64_t seed) {
  const Index n = rho.size();
  if (n == 0) return rho;
  std::vector<std::vector<Index>> adj(n);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < n; ++c)
      for (int j = 0; j <= rho.arity(); ++j)
        if (rho.q.coeff(j)(i, c) != Complex(0.0)) {
          adj[i].push_back(c);
          break;
        }
  const std::vector<Index> match = perfect_matching(adj, n);
  if (match.empty()) return rho;  // structurally singular
  std::vector<Index> node_of_col(n);
  for (Index i = 0; i < n; ++i) node_of_col[match[i]] = i;

  // node i -> node k when Q(i, match[k]) is structurally nonzero
  std::vector<std::vector<Index>> succ(n), pred(n);
  for (Index i = 0; i < n; ++i)
    for (Index c : adj[i]) {
      const Index k = node_of_col[c];
      if (k == i) continue;
      succ[i].push_back(k);
      pred[k].push_back(i);
    }
  auto closure = [&](std::vector<char> mark, const std::vector<std::vector<Index>>& g) {
    std::vector<Index> stack;
    for (Index i = 0; i < n; ++i)
      if (mark[i]) stack.push_back(i);
    while (!stack.empty()) {
      const Index i = stack.back();
      stack.pop_back();
      for (Index k : g[i])
        if (!mark[k]) {
          mark[k] = 1;
          stack.push_back(k);
        }
    }
    return mark;
  };
  std::vector<char> from_u(n, 0), to_v(n, 0);
  for (Index k = 0; k < n; ++k) {
    from_u[k] = !rho.u.col(match[k]).isZero(0.0);
    to_v[k] = !rho.v.row(k).isZero(0.0);
  }
  from_u = closure(from_u, succ);
  to_v = closure(to_v, pred);

  std::vector<Index> rows, cols;
  for (Index k = 0; k < n; ++k)
    if (from_u[k] && to_v[k]) {
      rows.push_back(k);
      cols.push_back(match[k]);
    }
  if (static_cast<Index>(rows.size()) == n) return rho;

  Flr out;
  out.q = rho.q.select(rows, cols);
  out.u = MatC(rho.out_rows(), cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) out.u.col(k) = rho.u.col(cols[k]);
  out.v = MatC(rows.size(), rho.out_cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.v.row(k) = rho.v.row(rows[k]);
  if (rows.empty()) {
    out.q = LinearPencil(rho.arity(), 0, 0);
  }

  // validate on random points; roll back on any disagreement
  int checked = 0;
  for (int t = 0; t < 50; ++t) {
    Rng rng = make_rng({seed, 0x9e37u, static_cast<std::uint64_t>(t)});
    const MatTuple x = random_tuple(rho.arity(), 1 + t % 3, rng);
    MatC a;
    try {
      a = eval_flr(rho, x);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DomainError) continue;
      throw;
    }
    MatC b;
    try {
      b = eval_flr(out, x);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DomainError) return rho;
      throw;
    }
    if (max_norm(a - b) > 1e-10 * (1.0 + max_norm(a))) return rho;
    ++checked;
  }
  if (checked == 0) return rho;
  return out;
}

MatC eval_flr(const Flr& rho, const MatTuple& x) {
  const Index n = tuple_dim(x);
  const MatC id = MatC::Identity(n, n);
  if (rho.size() == 0) return MatC::Zero(rho.out_rows() * n, rho.out_cols() * n);
  const MatC qx = eval_pencil(rho.q, x);
  const double cond = inverse_condition(qx);
  if (!(cond > kInvertibilityTol)) {
    throw Error(ErrorCode::DomainError, "linrep", "pencil is not invertible at the point",
                {{"inverse_condition", cond}, {"tolerance", kInvertibilityTol}});
  }
  const MatC sol = qx.partialPivLu().solve(kron(rho.v, id));
  return -kron(rho.u, id) * sol;
}

MatC eval_sa_flr(const SaFlr& rho, const MatTuple& x) {
  return eval_flr(Flr{rho.v.adjoint(), rho.q, rho.v}, x);
}

Realization realization_of(const MatNcExpr& r, int arity, bool prune) {
  MatC d = MatC::Zero(r.rows(), r.cols());
  MatNcExpr shifted = r;
  bool regular = true;
  for (Index i = 0; i < r.rows() && regular; ++i)
    for (Index j = 0; j < r.cols() && regular; ++j) {
      auto v = value_at_zero(r.at(i, j));
      if (!v) {
        regular = false;
        break;
      }
      d(i, j) = *v;
      if (*v != Complex(0.0)) shifted.at(i, j) = r.at(i, j) - NcExpr::constant(*v);
    }
  if (!regular) {
    d.setZero();
    shifted = r;
  }
  Flr rho = build_flr(shifted, arity);
  if (prune) rho = prune_flr(rho);
  return flr_to_realization(rho, d);
}

Realization realization_of(const NcExpr& r, int arity, bool prune) {
  return realization_of(MatNcExpr(1, 1, {r}), arity, prune);
}

}  // namespace ncrat
