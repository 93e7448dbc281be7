#include "ncrat/freeprob.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ncrat/errors.hpp"

namespace ncrat {

namespace {

// Inverse for matrices with definite imaginary part; those are invertible
// however small Im is, so only a breakdown of the LU itself counts.
std::optional<MatC> half_plane_inverse(const MatC& a) {
  Eigen::PartialPivLU<MatC> lu(a);
  MatC inv = lu.inverse();
  if (!all_finite(inv)) return std::nullopt;
  return inv;
}

// Direct Gauss-Legendre integration of (A - t)^-1 over the law, used when A
// is too far from normal for the eigenvector route.
MatC direct_matricial_cauchy(const Law& mu, const MatC& a) {
  const Index n = a.rows();
  const MatC id = MatC::Identity(n, n);
  MatC out = MatC::Zero(n, n);
  for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
    auto inv = try_inverse(a - mu.atoms()[i] * id);
    if (!inv) {
      throw Error(ErrorCode::NearSingularResolvent, "freeprob", "resolvent singular at an atom",
                  {{"t", mu.atoms()[i]}});
    }
    out += mu.weights()[i] * (*inv);
  }
  if (!mu.has_density()) return out;
  const auto [lo, hi] = mu.density_support();
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  // 16-point rule on 256 panels in theta
  static const std::vector<std::pair<double, double>> rule = [] {
    std::vector<std::pair<double, double>> r;
    const int m = 16;
    for (int i = 1; i <= m; ++i) {
      double x = std::cos(std::numbers::pi * (i - 0.25) / (m + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= m; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.emplace_back(x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    return r;
  }();
  const int panels = 256;
  const double width = std::numbers::pi / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * width;
    for (const auto& [x, w] : rule) {
      const double th = mid + 0.5 * width * x;
      const double t = c + h * std::cos(th);
      const double wt = mu.density(t) * h * std::sin(th) * 0.5 * width * w;
      if (wt == 0.0) continue;
      auto inv = try_inverse(a - t * id);
      if (!inv) {
        throw Error(ErrorCode::NearSingularResolvent, "freeprob",
                    "resolvent singular on the support", {{"t", t}});
      }
      out += wt * (*inv);
    }
  }
  return out;
}

}  // namespace

Complex scalar_cauchy(const Law& mu, Complex z) { return mu.cauchy(z); }

MatC matricial_cauchy(const Law& mu, const MatC& a) {
  const Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::ShapeMismatch, "freeprob", "A must be square");
  if (n == 0) return MatC(0, 0);
  if (n == 1) return MatC::Constant(1, 1, mu.cauchy(a(0, 0)));
  Eigen::ComplexEigenSolver<MatC> es(a);
  if (es.info() == Eigen::Success) {
    const MatC& v = es.eigenvectors();
    auto v_inv = try_inverse(v, 1e-8);
    if (v_inv) {
      VecC f(n);
      for (Index k = 0; k < n; ++k) f(k) = mu.cauchy(es.eigenvalues()(k));
      return v * f.asDiagonal() * (*v_inv);
    }
  }
  return direct_matricial_cauchy(mu, a);
}

MatC f_transform(const MatC& g) {
  auto inv = half_plane_inverse(g);
  if (!inv) {
    throw Error(ErrorCode::SingularG, "freeprob", "Cauchy value is not invertible",
                {{"inverse_condition", inverse_condition(g)}});
  }
  return *inv;
}

MatC h_transform(const MatC& b, const MatC& g_at_b) { return f_transform(g_at_b) - b; }

TensorVariable::TensorVariable(MatC lambda, Law law) : lambda_(std::move(lambda)), law_(std::move(law)) {
  const HermitianEig eig = hermitian_eig(lambda_);
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  std::vector<Index> nz, z;
  for (Index i = 0; i < eig.values.size(); ++i)
    (std::abs(eig.values(i)) > 1e-12 * scale ? nz : z).push_back(i);
  const Index n = lambda_.rows();
  u_nonzero_.resize(n, nz.size());
  eig_nonzero_.resize(nz.size());
  for (std::size_t k = 0; k < nz.size(); ++k) {
    u_nonzero_.col(k) = eig.vectors.col(nz[k]);
    eig_nonzero_(k) = eig.values(nz[k]);
  }
  u_zero_.resize(n, z.size());
  for (std::size_t k = 0; k < z.size(); ++k) u_zero_.col(k) = eig.vectors.col(z[k]);
}

CauchyValue TensorVariable::eval(const MatC& b) {
  const Index n = lambda_.rows();
  const Index d = u_nonzero_.cols();
  if (d == 0) return {f_transform(b), MatC::Zero(n, n)};
  const MatC& u1 = u_nonzero_;
  const MatC& u2 = u_zero_;
  const MatC b11 = u1.adjoint() * b * u1;
  MatC b0 = b11;
  MatC b22_inv, k, l;
  if (u2.cols() > 0) {
    const MatC b22 = u2.adjoint() * b * u2;
    auto inv = half_plane_inverse(b22);
    if (!inv) {
      throw Error(ErrorCode::SingularBlock, "freeprob", "kernel block of B is not invertible",
                  {{"which", "B22"}});
    }
    b22_inv = std::move(*inv);
    k = (u1.adjoint() * b * u2) * b22_inv;  // B12 B22^-1
    l = b22_inv * (u2.adjoint() * b * u1);  // B22^-1 B21
    b0 -= (u1.adjoint() * b * u2) * l;
  }
  const VecC lam_inv = eig_nonzero_.cwiseInverse().cast<Complex>();
  const MatC a = lam_inv.asDiagonal() * b0;
  const MatC ghat = matricial_cauchy(law_, a);
  const MatC g0 = ghat * lam_inv.asDiagonal();
  MatC g = u1 * g0 * u1.adjoint();
  if (u2.cols() > 0) {
    g -= u1 * (g0 * k) * u2.adjoint();
    g -= u2 * (l * g0) * u1.adjoint();
    g += u2 * (b22_inv + l * g0 * k) * u2.adjoint();
  }
  auto ghat_inv = half_plane_inverse(ghat);
  if (!ghat_inv) {
    throw Error(ErrorCode::SingularG, "freeprob", "matricial Cauchy value is not invertible",
                {{"inverse_condition", inverse_condition(ghat)}});
  }
  const MatC h0 = eig_nonzero_.cast<Complex>().asDiagonal() * (*ghat_inv) - b0;
  return {g, u1 * h0 * u1.adjoint()};
}

std::unique_ptr<OperatorVariable> TensorVariable::clone() const {
  return std::make_unique<TensorVariable>(*this);
}

MatC opval_cauchy_tensor(const MatC& lambda, const Law& mu, const MatC& b) {
  TensorVariable x(lambda, mu);
  return x.eval(b).g;
}

namespace {

template <class Step>
SubordinationResult iterate(Step&& step, const MatC& b, const SubordinationOptions& opts,
                            const MatC* start) {
  SubordinationResult res;
  MatC w = start ? *start : b;
  double lambda = opts.damping;
  double prev = INFINITY;
  int stalled = 0;
  bool switched = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const MatC f = step(w);
    MatC next = (1.0 - lambda) * w + lambda * f;
    const double delta = max_norm(next - w);
    w = std::move(next);
    res.iterations = it;
    res.last_delta = delta;
    if (!std::isfinite(delta)) break;
    if (delta < opts.tol * std::max(1.0, max_norm(w))) {
      res.omega1 = std::move(w);
      return res;
    }
    if (delta >= prev) {
      if (++stalled >= opts.stall_window && !switched) {
        lambda = opts.fallback_damping;
        switched = true;
      }
    } else {
      stalled = 0;
    }
    prev = delta;
  }
  throw Error(ErrorCode::NoConvergence, "freeprob", "subordination did not converge",
              {{"iterations", res.iterations}, {"last_delta", res.last_delta}});
}

}  // namespace

SubordinationResult subordinate_pair(const HTransform& hx, const HTransform& hy, const MatC& b,
                                     const SubordinationOptions& opts, const MatC* start) {
  SubordinationResult res = iterate([&](const MatC& w) -> MatC { return hy(hx(w) + b) + b; }, b, opts, start);
  res.omega2 = hx(res.omega1) + b;
  return res;
}

SubordinationResult subordinate_pair(OperatorVariable& x, OperatorVariable& y, const MatC& b,
                                     const SubordinationOptions& opts, const MatC* start) {
  SubordinationResult res = iterate(
      [&](const MatC& w) -> MatC { return y.eval(x.eval(w).h + b).h + b; }, b, opts, start);
  const CauchyValue at = x.eval(res.omega1);
  res.omega2 = at.h + b;
  res.g_sum = at.g;
  return res;
}

SumVariable::SumVariable(std::unique_ptr<OperatorVariable> x, std::unique_ptr<OperatorVariable> y,
                         SubordinationOptions opts, int* max_iter_seen)
    : x_(std::move(x)), y_(std::move(y)), opts_(opts), max_iter_seen_(max_iter_seen) {
  if (x_->dim() != y_->dim()) {
    throw Error(ErrorCode::ShapeMismatch, "freeprob", "summands act on different sizes");
  }
}

CauchyValue SumVariable::eval(const MatC& b) {
  const MatC* start = last_omega_.size() == b.size() ? &last_omega_ : nullptr;
  SubordinationResult res = subordinate_pair(*x_, *y_, b, opts_, start);
  if (max_iter_seen_) *max_iter_seen_ = std::max(*max_iter_seen_, res.iterations);
  last_omega_ = res.omega1;
  MatC h = f_transform(res.g_sum) - b;
  return {std::move(res.g_sum), std::move(h)};
}

std::unique_ptr<OperatorVariable> SumVariable::clone() const {
  return std::make_unique<SumVariable>(x_->clone(), y_->clone(), opts_, max_iter_seen_);
}

void SumVariable::set_counter(int* max_iter_seen) {
  max_iter_seen_ = max_iter_seen;
  if (auto* s = dynamic_cast<SumVariable*>(x_.get())) s->set_counter(max_iter_seen);
  if (auto* s = dynamic_cast<SumVariable*>(y_.get())) s->set_counter(max_iter_seen);
}

void SumVariable::forget_start() {
  last_omega_.resize(0, 0);
  if (auto* s = dynamic_cast<SumVariable*>(x_.get())) s->forget_start();
  if (auto* s = dynamic_cast<SumVariable*>(y_.get())) s->forget_start();
}

PencilCauchy::PencilCauchy(MatC lambda0, std::vector<PencilTerm> terms, SubordinationOptions opts)
    : lambda0_(std::move(lambda0)), terms_(std::move(terms)), opts_(opts) {
  build();
}

PencilCauchy::PencilCauchy(const PencilCauchy& other)
    : lambda0_(other.lambda0_), terms_(other.terms_), opts_(other.opts_) {
  build();
}

void PencilCauchy::build() {
  if (!is_hermitian(lambda0_, 1e-12) && max_norm(lambda0_) > 0.0) {
    throw Error(ErrorCode::NotHermitian, "freeprob", "constant pencil term is not Hermitian");
  }
  std::unique_ptr<OperatorVariable> acc;
  for (const auto& t : terms_) {
    if (t.lambda.rows() != lambda0_.rows() || t.lambda.cols() != lambda0_.cols()) {
      throw Error(ErrorCode::ShapeMismatch, "freeprob", "pencil terms differ in size");
    }
    if (max_norm(t.lambda) == 0.0) continue;
    auto var = std::make_unique<TensorVariable>(t.lambda, t.law);
    if (!acc) {
      acc = std::move(var);
    } else {
      acc = std::make_unique<SumVariable>(std::move(acc), std::move(var), opts_, &max_iter_seen_);
    }
  }
  var_ = std::move(acc);
}

void PencilCauchy::forget_start() {
  if (auto* s = dynamic_cast<SumVariable*>(var_.get())) s->forget_start();
}

MatC PencilCauchy::operator()(const MatC& b) {
  const MatC shifted = b - lambda0_;
  if (!var_) return f_transform(shifted);
  return var_->eval(shifted).g;
}

MatC pencil_sum_cauchy(const MatC& lambda0, const std::vector<PencilTerm>& terms, const MatC& b,
                       const SubordinationOptions& opts) {
  PencilCauchy pc(lambda0, terms, opts);
  return pc(b);
}

}  // namespace ncrat
