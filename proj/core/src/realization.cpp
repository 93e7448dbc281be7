#include "ncrat/realization.hpp"

#include <algorithm>

#include "ncrat/errors.hpp"

namespace ncrat {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, "realization", what);
}

// Krylov closure of span(start) under the maps.
MatC krylov(const MatC& start, const std::vector<MatC>& maps, Index dim) {
  double scale = 1.0;
  for (const auto& m : maps) scale = std::max(scale, max_norm(m));
  MatC basis = orthonormal_range(start, kRankTol);
  MatC fresh = basis;
  while (fresh.cols() > 0 && basis.cols() < dim) {
    MatC images(dim, fresh.cols() * static_cast<Index>(maps.size()));
    for (std::size_t j = 0; j < maps.size(); ++j)
      images.middleCols(j * fresh.cols(), fresh.cols()) = maps[j] * fresh;
    // two passes of projection for numerical orthogonality
    MatC resid = images - basis * (basis.adjoint() * images);
    resid -= basis * (basis.adjoint() * resid);
    fresh = orthonormal_range(resid, kRankTol, scale * std::max(1.0, max_norm(start)));
    if (fresh.cols() == 0) break;
    MatC next(dim, basis.cols() + fresh.cols());
    next << basis, fresh;
    basis = std::move(next);
  }
  return basis;
}

}  // namespace

bool Realization::is_monic(double tol) const {
  return max_norm(j - MatC::Identity(j.rows(), j.cols())) <= tol;
}

bool Realization::is_selfadjoint(double tol) const {
  if (d.rows() != d.cols() || max_norm(d - d.adjoint()) > tol) return false;
  if (max_norm(b - c.adjoint()) > tol) return false;
  for (const auto& m : a)
    if (max_norm(m - m.adjoint()) > tol) return false;
  return true;
}

void Realization::validate() const {
  const Index n = j.rows();
  require(j.cols() == n, "J must be square");
  require(c.rows() == d.rows() && c.cols() == n, "C has the wrong shape");
  require(b.rows() == n && b.cols() == d.cols(), "B has the wrong shape");
  for (const auto& m : a) require(m.rows() == n && m.cols() == n, "A_j has the wrong shape");
  const MatC id = MatC::Identity(n, n);
  const double dev = std::max(max_norm(j - j.adjoint()), max_norm(j * j - id));
  if (dev > 1e-10) {
    throw Error(ErrorCode::NotSignature, "realization", "J is not a signature matrix",
                {{"deviation", dev}});
  }
}

Realization make_realization(MatC d, MatC c, MatC j, std::vector<MatC> a, MatC b) {
  Realization r{std::move(d), std::move(c), std::move(j), std::move(a), std::move(b)};
  r.validate();
  return r;
}

Realization monic_form(const Realization& r) {
  Realization m = r;
  const Index n = r.state_dim();
  if (r.is_monic(0.0)) return m;
  for (auto& x : m.a) x = r.j * x;
  m.b = r.j * r.b;
  m.j = MatC::Identity(n, n);
  return m;
}

LinearPencil sys_matrix(const Realization& r) {
  const Index n = r.state_dim(), d1 = r.out_rows(), d2 = r.out_cols();
  LinearPencil p(r.arity(), n + d1, n + d2);
  MatC& q0 = p.coeff(0);
  q0.topLeftCorner(n, n) = r.j;
  q0.topRightCorner(n, d2) = r.b;
  q0.bottomLeftCorner(d1, n) = r.c;
  q0.bottomRightCorner(d1, d2) = -r.d;
  for (int k = 1; k <= r.arity(); ++k) p.coeff(k).topLeftCorner(n, n) = -r.a[k - 1];
  return p;
}

MatC controllable_space(const Realization& r) {
  const Realization m = monic_form(r);
  return krylov(m.b, m.a, m.state_dim());
}

MatC unobservable_space(const Realization& r) {
  const Realization m = monic_form(r);
  std::vector<MatC> adj;
  for (const auto& x : m.a) adj.push_back(x.adjoint());
  const MatC observable = krylov(m.c.adjoint(), adj, m.state_dim());
  return orthogonal_complement(observable, m.state_dim());
}

Realization cut_down(const Realization& r) {
  const Realization m = monic_form(r);
  const MatC v = krylov(m.b, m.a, m.state_dim());
  Realization ctl;
  ctl.d = m.d;
  ctl.c = m.c * v;
  ctl.b = v.adjoint() * m.b;
  ctl.j = MatC::Identity(v.cols(), v.cols());
  for (const auto& x : m.a) ctl.a.push_back(v.adjoint() * x * v);

  std::vector<MatC> adj;
  for (const auto& x : ctl.a) adj.push_back(x.adjoint());
  const MatC w = krylov(ctl.c.adjoint(), adj, ctl.state_dim());
  Realization out;
  out.d = ctl.d;
  out.c = ctl.c * w;
  out.b = w.adjoint() * ctl.b;
  out.j = MatC::Identity(w.cols(), w.cols());
  for (const auto& x : ctl.a) out.a.push_back(w.adjoint() * x * w);
  return out;
}

MatC realization_series_coeff(const Realization& r, const Word& w) {
  MatC right = r.j * r.b;
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    if (*it < 1 || *it > r.arity()) {
      throw Error(ErrorCode::ArityError, "realization", "word letter exceeds arity",
                  {{"letter", *it}, {"arity", r.arity()}});
    }
    right = r.j * (r.a[*it - 1] * right);
  }
  MatC out = r.c * right;
  if (w.empty()) out += r.d;
  return out;
}

std::optional<MatC> check_similarity(const Realization& r1, const Realization& r2) {
  const Realization a = monic_form(r1);
  const Realization b = monic_form(r2);
  if (a.state_dim() != b.state_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "realization", "state dimensions differ",
                {{"left", a.state_dim()}, {"right", b.state_dim()}});
  }
  if (a.arity() != b.arity() || a.out_rows() != b.out_rows() || a.out_cols() != b.out_cols()) {
    throw Error(ErrorCode::DimensionMismatch, "realization", "realization shapes differ");
  }
  const Index n = a.state_dim(), d1 = a.out_rows(), d2 = a.out_cols();
  if (n == 0) return MatC(0, 0);
  const MatC id = MatC::Identity(n, n);
  const Index rows = a.arity() * n * n + n * d2 + d1 * n;
  MatC sys = MatC::Zero(rows, n * n);
  VecC rhs = VecC::Zero(rows);
  Index off = 0;
  // column-major vec: vec(S M) = (M^T kron I) vec S, vec(M S) = (I kron M) vec S
  for (int k = 0; k < a.arity(); ++k) {
    sys.middleRows(off, n * n) = kron(a.a[k].transpose(), id) - kron(id, b.a[k]);
    off += n * n;
  }
  sys.middleRows(off, n * d2) = kron(a.b.transpose(), id);
  rhs.segment(off, n * d2) = Eigen::Map<const VecC>(b.b.data(), n * d2);
  off += n * d2;
  sys.middleRows(off, d1 * n) = kron(MatC::Identity(n, n), b.c);
  rhs.segment(off, d1 * n) = Eigen::Map<const VecC>(a.c.data(), d1 * n);

  const VecC s_vec = sys.completeOrthogonalDecomposition().solve(rhs);
  MatC s = Eigen::Map<const MatC>(s_vec.data(), n, n);

  double scale = 1.0 + max_norm(s);
  for (const auto& m : a.a) scale = std::max(scale, 1.0 + max_norm(m));
  scale = std::max({scale, 1.0 + max_norm(a.b), 1.0 + max_norm(a.c)});
  double resid = std::max(max_norm(s * a.b - b.b), max_norm(a.c - b.c * s));
  for (int k = 0; k < a.arity(); ++k) resid = std::max(resid, max_norm(s * a.a[k] - b.a[k] * s));
  if (resid > 1e-8 * scale * scale) return std::nullopt;
  if (!is_invertible(s)) return std::nullopt;
  return s;
}

MatC eval_realization(const Realization& r, const MatTuple& x) {
  if (static_cast<int>(x.size()) != r.arity()) {
    throw Error(ErrorCode::ShapeMismatch, "realization", "tuple arity does not match",
                {{"arity", r.arity()}, {"tuple", x.size()}});
  }
  const Index n = tuple_dim(x);
  const Index dim = r.state_dim();
  const MatC id = MatC::Identity(n, n);
  MatC resolvent = kron(r.j, id);
  for (int k = 0; k < r.arity(); ++k) resolvent -= kron(r.a[k], x[k]);
  auto inv = try_inverse(resolvent);
  if (!inv) {
    throw Error(ErrorCode::DomainError, "realization", "resolvent is not invertible",
                {{"inverse_condition", inverse_condition(resolvent)}, {"state_dim", dim}});
  }
  return kron(r.d, id) + kron(r.c, id) * (*inv) * kron(r.b, id);
}

}  // namespace ncrat
