#include "ncrat/algorithms.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "ncrat/errors.hpp"

namespace ncrat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MatC hermitian_part(const MatC& m) { return 0.5 * (m + m.adjoint()); }

double coeff_scale(const LinearPencil& p) {
  double s = 1.0;
  for (const auto& c : p.coeffs()) s = std::max(s, max_norm(c));
  return s;
}

// Runs fn(chunk) for chunk in [0, count) on up to `workers` threads.
void parallel_chunks(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < count; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < count; c = next++) {
        try {
          fn(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

constexpr std::size_t kChunk = 16;

}  // namespace

MatC eval_generalized(const GeneralizedRealization& g, const MatTuple& x) {
  const Index n = tuple_dim(x);
  const MatC id = MatC::Identity(n, n);
  MatC out = kron(g.delta, id);
  if (g.state_dim() == 0) return out;
  const MatC lam = eval_pencil(g.lambda, x);
  const MatC xi = kron(g.xi, id);
  Eigen::PartialPivLU<MatC> lu(lam);
  if (inverse_condition(lam) < kInvertibilityTol) {
    throw Error(ErrorCode::DomainError, "algorithms", "pencil is not invertible at the point",
                {{"inverse_condition", inverse_condition(lam)}});
  }
  return out + xi.adjoint() * lu.solve(xi);
}

GeneralizedRealization from_sa_flr(const SaFlr& rho) {
  const Index k = rho.v.cols();
  return {MatC::Zero(k, k), rho.v, rho.q.scaled(-1.0)};
}

GeneralizedRealization from_selfadjoint_realization(const Realization& r) {
  r.validate();
  double scale = std::max({1.0, max_norm(r.b), max_norm(r.c)});
  for (const auto& a : r.a) scale = std::max(scale, max_norm(a));
  const double tol = 1e-8 * scale;
  bool ok = max_norm(r.c - r.b.adjoint()) <= tol && max_norm(r.d - r.d.adjoint()) <= tol;
  for (const auto& a : r.a) ok = ok && max_norm(a - a.adjoint()) <= tol;
  if (!ok) {
    throw Error(ErrorCode::NotSelfadjointInput, "algorithms", "realization is not selfadjoint");
  }
  std::vector<MatC> coeffs{r.j};
  for (const auto& a : r.a) coeffs.push_back(-hermitian_part(a));
  return {hermitian_part(r.d), r.b, LinearPencil(std::move(coeffs))};
}

Realization minimal_selfadjoint(const Realization& r) {
  const Realization m = cut_down(r);
  const Index n = m.state_dim();
  if (n == 0) return m;
  Realization flipped;
  flipped.d = m.d.adjoint();
  flipped.c = m.b.adjoint();
  flipped.j = MatC::Identity(n, n);
  flipped.b = m.c.adjoint();
  for (const auto& a : m.a) flipped.a.push_back(a.adjoint());
  auto s = check_similarity(m, flipped);
  if (!s) {
    throw Error(ErrorCode::NotSelfadjointInput, "algorithms",
                "minimal realization has no selfadjoint form");
  }
  const HermitianEig eig = hermitian_eig(hermitian_part(*s));
  VecC sq(n), sq_inv(n);
  MatC j = MatC::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double l = eig.values(i);
    sq(i) = std::sqrt(std::abs(l));
    sq_inv(i) = 1.0 / sq(i);
    j(i, i) = l < 0.0 ? -1.0 : 1.0;
  }
  const MatC t = sq.asDiagonal() * eig.vectors.adjoint();
  const MatC t_inv = eig.vectors * sq_inv.asDiagonal();
  Realization out;
  out.d = hermitian_part(m.d);
  out.b = t * m.b;
  out.c = out.b.adjoint();
  out.j = j;
  for (const auto& a : m.a) out.a.push_back(hermitian_part(t * a * t_inv * j));
  return out;
}

GeneralizedRealization realize_flr(const Flr& rho, RealizationPath path) {
  if (rho.out_rows() != rho.out_cols()) {
    throw Error(ErrorCode::ShapeMismatch, "algorithms", "values must be square");
  }
  if (path == RealizationPath::Auto) {
    try {
      return realize_flr(rho, RealizationPath::Minimal);
    } catch (const Error&) {
      return realize_flr(rho, RealizationPath::SaFlr);
    }
  }
  if (path == RealizationPath::SaFlr) {
    return from_sa_flr(make_selfadjoint_flr(prune_flr(rho), false));
  }
  const SaFlr sa = make_selfadjoint_flr(rho, true);
  const Index k = rho.out_rows();
  const Realization real = sa_flr_to_realization(sa, MatC::Zero(k, k));
  return from_selfadjoint_realization(minimal_selfadjoint(real));
}

GeneralizedRealization realize_at(const NcExpr& r, int arity, RealizationPath path) {
  return realize_flr(build_flr(r, arity), path);
}

GeneralizedRealization realize_at(const MatNcExpr& r, int arity, RealizationPath path) {
  return realize_flr(build_flr(r, arity), path);
}

GeneralizedRealization hermitized_realization(const NcExpr& r, int arity, RealizationPath path) {
  const Flr rho = prune_flr(build_flr(r, arity));
  if (path == RealizationPath::SaFlr) return from_sa_flr(hermitize_flr(rho));
  // -u_h Q_h^-1 v_h = [[0, r], [r*, 0]] with Q_h = diag(Q, Q*)
  const Index n = rho.size();
  Flr h;
  h.u = MatC::Zero(2, 2 * n);
  h.u.block(0, 0, 1, n) = rho.u;
  h.u.block(1, n, 1, n) = rho.v.adjoint();
  h.q = LinearPencil(rho.arity(), 2 * n, 2 * n);
  for (int j = 0; j <= rho.arity(); ++j) {
    h.q.coeff(j).topLeftCorner(n, n) = rho.q.coeff(j);
    h.q.coeff(j).bottomRightCorner(n, n) = rho.q.coeff(j).adjoint();
  }
  h.v = MatC::Zero(2 * n, 2);
  h.v.block(0, 1, n, 1) = rho.v;
  h.v.block(n, 0, n, 1) = rho.u.adjoint();
  return realize_flr(h, path);
}

ShiftedPencil build_shifted_pencil(const GeneralizedRealization& g) {
  const Index k = g.corner(), n = g.state_dim();
  if (g.delta.cols() != k || g.xi.rows() != n || g.xi.cols() != k || g.lambda.cols() != n) {
    throw Error(ErrorCode::ShapeMismatch, "algorithms", "realization blocks do not fit");
  }
  const double tol = 1e-10 * std::max(coeff_scale(g.lambda), 1.0 + max_norm(g.delta));
  if (max_norm(g.delta - g.delta.adjoint()) > tol || !g.lambda.is_hermitian(tol)) {
    throw Error(ErrorCode::NotSelfadjointInput, "algorithms", "realization is not selfadjoint");
  }
  LinearPencil p(g.arity(), k + n, k + n);
  p.coeff(0).topLeftCorner(k, k) = g.delta;
  p.coeff(0).topRightCorner(k, n) = g.xi.adjoint();
  p.coeff(0).bottomLeftCorner(n, k) = g.xi;
  p.coeff(0).bottomRightCorner(n, n) = -g.lambda.coeff(0);
  for (int j = 1; j <= g.arity(); ++j) p.coeff(j).bottomRightCorner(n, n) = -g.lambda.coeff(j);
  return {p, k};
}

MatC shifted_pencil_value(const ShiftedPencil& p, const MatTuple& x) {
  const Index n = tuple_dim(x);
  const MatC m = eval_pencil(p.pencil, x);
  const Index c = p.corner * n, s = m.rows() - c;
  if (s == 0) return m;
  const MatC m22 = m.bottomRightCorner(s, s);
  if (inverse_condition(m22) < kInvertibilityTol) {
    throw Error(ErrorCode::DomainError, "algorithms", "pencil is not invertible at the point",
                {{"inverse_condition", inverse_condition(m22)}});
  }
  return m.topLeftCorner(c, c) -
         m.topRightCorner(c, s) * m22.partialPivLu().solve(m.bottomLeftCorner(s, c));
}

namespace {

PencilCauchy make_pencil_cauchy(const ShiftedPencil& p, const std::vector<Law>& laws,
                                const SubordinationOptions& opts) {
  if (static_cast<int>(laws.size()) != p.arity()) {
    throw Error(ErrorCode::ConfigError, "algorithms", "one law per variable is required",
                {{"arity", p.arity()}, {"laws", laws.size()}});
  }
  std::vector<PencilTerm> terms;
  for (int j = 1; j <= p.arity(); ++j) terms.push_back({p.pencil.coeff(j), laws[j - 1]});
  return PencilCauchy(p.pencil.coeff(0), std::move(terms), opts);
}

}  // namespace

ExprCauchy::ExprCauchy(ShiftedPencil pencil, std::vector<Law> laws, EpsSchedule schedule,
                       SubordinationOptions opts)
    : pencil_(std::move(pencil)),
      schedule_(schedule),
      cauchy_(make_pencil_cauchy(pencil_, laws, opts)) {
  if (!(schedule_.start > 0.0) || !(schedule_.final_eps > 0.0)) {
    throw Error(ErrorCode::ConfigError, "algorithms", "eps schedule must be positive");
  }
}

MatC ExprCauchy::operator()(const MatC& b, CauchyDiagnostics* diag) {
  const Index k = pencil_.corner, n = pencil_.size() - k;
  if (b.rows() != k || b.cols() != k) {
    throw Error(ErrorCode::ShapeMismatch, "algorithms", "point has the wrong size");
  }
  MatC full = MatC::Zero(k + n, k + n);
  full.topLeftCorner(k, k) = b;
  CauchyDiagnostics local;
  auto finish = [&](MatC value) {
    local.max_iterations = cauchy_.max_iterations_seen();
    if (diag) *diag = local;
    return value;
  };
  if (n == 0) return finish(cauchy_(full));

  std::vector<double> deltas;
  MatC prev_g, prev_r;
  double eps = schedule_.start;
  for (int level = 0;; ++level, eps *= 0.5) {
    full.bottomRightCorner(n, n) = Complex(0.0, eps) * MatC::Identity(n, n);
    MatC g;
    try {
      g = cauchy_(full).topLeftCorner(k, k);
    } catch (const Error& e) {
      // the fixed point hit its rounding floor; the previous level ends the schedule
      if (e.code() != ErrorCode::NoConvergence || deltas.empty()) throw;
      if (local.last_delta < schedule_.fallback_tol) {
        local.eps_used = 2.0 * eps;
        local.levels = level;
        return finish(prev_r);
      }
      throw Error(ErrorCode::BoundaryLimitUnstable, "algorithms", "corner limit did not settle",
                  {{"deltas", deltas}, {"eps", eps}, {"cause", e.to_json()}});
    }
    local.levels = level + 1;
    local.eps_used = eps;
    const bool last = eps * 0.5 < schedule_.final_eps;
    if (level == 0) {
      prev_g = g;
      if (last) return finish(g);
      continue;
    }
    const MatC r = 2.0 * g - prev_g;
    if (level >= 2) {
      const double delta = max_norm(r - prev_r);
      deltas.push_back(delta);
      local.last_delta = delta;
      if (delta < schedule_.accept_tol) return finish(r);
      if (last) {
        if (delta < schedule_.fallback_tol) return finish(r);
        throw Error(ErrorCode::BoundaryLimitUnstable, "algorithms",
                    "corner limit did not settle", {{"deltas", deltas}, {"eps", eps}});
      }
    } else if (last) {
      const double delta = max_norm(g - prev_g);
      local.last_delta = delta;
      if (delta < schedule_.fallback_tol) return finish(r);
      throw Error(ErrorCode::BoundaryLimitUnstable, "algorithms", "corner limit did not settle",
                  {{"deltas", std::vector<double>{delta}}, {"eps", eps}});
    }
    prev_g = g;
    prev_r = r;
  }
}

MatC cauchy_of_expr(const ShiftedPencil& pencil, const std::vector<Law>& laws, const MatC& b,
                    const EpsSchedule& schedule, CauchyDiagnostics* diag) {
  ExprCauchy ec(pencil, laws, schedule);
  return ec(b, diag);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) {
    throw Error(ErrorCode::ConfigError, "algorithms", "grid needs two points and lo < hi");
  }
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return t;
}

DensityGrid stieltjes_invert(const std::vector<double>& t, const std::vector<Complex>& g,
                             double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::ConfigError, "algorithms", "eta must be positive");
  if (t.size() != g.size()) {
    throw Error(ErrorCode::ShapeMismatch, "algorithms", "grid and values differ in length");
  }
  DensityGrid out;
  out.t = t;
  out.eta = eta;
  out.density.resize(t.size());
  std::vector<double> negative(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double raw = -g[i].imag() / std::numbers::pi;
    if (!std::isfinite(raw)) {
      out.density[i] = kNaN;
      out.gaps.push_back(i);
      continue;
    }
    out.density[i] = std::max(0.0, raw);
    negative[i] = std::max(0.0, -raw);
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double a = out.density[i - 1], b = out.density[i];
    if (std::isnan(a) || std::isnan(b)) continue;
    const double h = t[i] - t[i - 1];
    out.mass += 0.5 * h * (a + b);
    out.clipped_mass += 0.5 * h * (negative[i - 1] + negative[i]);
  }
  return out;
}

DensityGrid compute_distribution(const NcExpr& r, int arity, const std::vector<Law>& laws,
                                 const std::vector<double>& t, double eta,
                                 const PipelineOptions& opts) {
  if (!(eta > 0.0)) throw Error(ErrorCode::ConfigError, "algorithms", "eta must be positive");
  const ShiftedPencil pencil = build_shifted_pencil(realize_at(r, arity, opts.path));
  if (pencil.corner != 1) {
    throw Error(ErrorCode::ShapeMismatch, "algorithms", "expression must be scalar");
  }
  std::vector<Complex> g(t.size(), Complex(kNaN, kNaN));
  std::vector<double> eps_used(t.size(), 0.0);
  std::vector<int> iters(t.size(), 0);
  const std::size_t chunks = (t.size() + kChunk - 1) / kChunk;
  parallel_chunks(chunks, opts.workers, [&](std::size_t c) {
    ExprCauchy ec(pencil, laws, opts.schedule, opts.subordination);
    for (std::size_t i = c * kChunk; i < std::min(t.size(), (c + 1) * kChunk); ++i) {
      CauchyDiagnostics d;
      try {
        g[i] = ec(MatC::Constant(1, 1, Complex(t[i], eta)), &d)(0, 0);
        eps_used[i] = d.eps_used;
        iters[i] = d.max_iterations;
      } catch (const Error&) {
        ec.forget_start();
      }
    }
  });
  DensityGrid out = stieltjes_invert(t, g, eta);
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.eps_used = std::max(out.eps_used, eps_used[i]);
    out.iterations_max_seen = std::max(out.iterations_max_seen, iters[i]);
  }
  return out;
}

namespace {

EpsSchedule brown_schedule(EpsSchedule s, double eps) {
  s.start = 1e-3 * eps;
  s.final_eps = std::min(s.final_eps, s.start / 256.0);
  return s;
}

}  // namespace

HermitizedCauchy::HermitizedCauchy(const NcExpr& r, int arity, std::vector<Law> laws, double eps,
                                   const PipelineOptions& opts)
    : eps_(eps),
      cauchy_(build_shifted_pencil(hermitized_realization(r, arity, opts.path)), std::move(laws),
              brown_schedule(opts.schedule, eps), opts.subordination) {
  if (!(eps > 0.0)) throw Error(ErrorCode::ConfigError, "algorithms", "eps must be positive");
}

Complex HermitizedCauchy::operator()(Complex z, CauchyDiagnostics* diag) {
  MatC b(2, 2);
  b << Complex(0.0, eps_), z, std::conj(z), Complex(0.0, eps_);
  return cauchy_(b, diag)(1, 0);
}

Complex hermitized_cauchy(const NcExpr& r, int arity, const std::vector<Law>& laws, Complex z,
                          double eps, const PipelineOptions& opts) {
  HermitizedCauchy hc(r, arity, laws, eps, opts);
  return hc(z);
}

BrownGrid compute_brown(const NcExpr& r, int arity, const std::vector<Law>& laws,
                        const std::vector<double>& x, const std::vector<double>& y, double eps,
                        const PipelineOptions& opts) {
  const std::size_t nx = x.size(), ny = y.size();
  if (nx < 2 || ny < 2) throw Error(ErrorCode::ConfigError, "algorithms", "grid too small");
  for (std::size_t i = 1; i < nx; ++i)
    if (!(x[i] > x[i - 1])) throw Error(ErrorCode::ConfigError, "algorithms", "x grid not increasing");
  for (std::size_t i = 1; i < ny; ++i)
    if (!(y[i] > y[i - 1])) throw Error(ErrorCode::ConfigError, "algorithms", "y grid not increasing");

  const HermitizedCauchy proto(r, arity, laws, eps, opts);
  std::vector<Complex> g(nx * ny, Complex(kNaN, kNaN));
  std::vector<int> iters(ny, 0);
  parallel_chunks(ny, opts.workers, [&](std::size_t iy) {
    HermitizedCauchy hc = proto;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      CauchyDiagnostics d;
      try {
        g[iy * nx + ix] = hc(Complex(x[ix], y[iy]), &d);
        iters[iy] = std::max(iters[iy], d.max_iterations);
      } catch (const Error&) {
        hc.forget_start();
      }
    }
  });

  auto diff = [](const std::vector<double>& s, std::size_t i, std::size_t n, auto&& f) {
    const std::size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 == n ? i : i + 1;
    return (f(hi) - f(lo)) / (s[hi] - s[lo]);
  };
  auto weight = [](const std::vector<double>& s, std::size_t i) {
    const std::size_t n = s.size();
    const double left = i == 0 ? 0.0 : s[i] - s[i - 1];
    const double right = i + 1 == n ? 0.0 : s[i + 1] - s[i];
    return 0.5 * (left + right);
  };

  BrownGrid out;
  out.x = x;
  out.y = y;
  out.eps = eps;
  out.density.assign(nx * ny, kNaN);
  for (int it : iters) out.iterations_max_seen = std::max(out.iterations_max_seen, it);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Complex dx = diff(x, ix, nx, [&](std::size_t k) { return g[iy * nx + k]; });
      const Complex dy = diff(y, iy, ny, [&](std::size_t k) { return g[k * nx + ix]; });
      const Complex dzbar = 0.5 * (dx + Complex(0.0, 1.0) * dy);
      const double re = dzbar.real() / std::numbers::pi;
      if (!std::isfinite(re) || !std::isfinite(dzbar.imag())) {
        out.gaps.push_back(iy * nx + ix);
        continue;
      }
      const double w = weight(x, ix) * weight(y, iy);
      out.density[iy * nx + ix] = std::max(0.0, re);
      out.mass += w * std::max(0.0, re);
      out.clipped_mass += w * std::max(0.0, -re);
      out.imag_residue_max = std::max(out.imag_residue_max, std::abs(dzbar.imag()) / std::numbers::pi);
    }
  }
  return out;
}

}  // namespace ncrat
