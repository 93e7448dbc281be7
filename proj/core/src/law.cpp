#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ncrat/errors.hpp"
#include "ncrat/freeprob.hpp"

namespace ncrat {

namespace {

constexpr double kPi = std::numbers::pi;

void check(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::ConfigError, "freeprob", msg);
}

}  // namespace

Law Law::semicircle(double mean, double variance) {
  check(std::isfinite(mean) && variance > 0.0 && std::isfinite(variance),
        "semicircle needs a finite mean and positive variance");
  Law l;
  l.kind_ = Kind::Semicircle;
  l.params_ = {mean, variance};
  const double r = 2.0 * std::sqrt(variance);
  l.has_density_ = true;
  l.lo_ = mean - r;
  l.hi_ = mean + r;
  l.expand();
  return l;
}

Law Law::marchenko_pastur(double rate, double scale) {
  check(rate > 0.0 && scale > 0.0 && std::isfinite(rate) && std::isfinite(scale),
        "marchenko_pastur needs positive rate and scale");
  Law l;
  l.kind_ = Kind::MarchenkoPastur;
  l.params_ = {rate, scale};
  const double s = std::sqrt(rate);
  l.has_density_ = true;
  l.lo_ = scale * (1.0 - s) * (1.0 - s);
  l.hi_ = scale * (1.0 + s) * (1.0 + s);
  if (rate < 1.0) {
    l.atoms_ = {0.0};
    l.weights_ = {1.0 - rate};
  }
  l.expand();
  return l;
}

Law Law::atomic(std::vector<double> atoms, std::vector<double> weights) {
  check(!atoms.empty() && atoms.size() == weights.size(),
        "atomic law needs matching nonempty atoms and weights");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    check(std::isfinite(atoms[i]), "atoms must be finite");
    check(weights[i] > 0.0 && std::isfinite(weights[i]), "weights must be positive");
    total += weights[i];
  }
  check(std::abs(total - 1.0) <= 1e-8, "weights must sum to 1");
  Law l;
  l.kind_ = Kind::Atomic;
  l.atoms_ = std::move(atoms);
  l.weights_ = std::move(weights);
  l.expand();
  return l;
}

Law Law::empirical(std::vector<double> samples) {
  check(!samples.empty(), "empirical law needs samples");
  for (double s : samples) check(std::isfinite(s), "samples must be finite");
  Law l;
  l.kind_ = Kind::Empirical;
  const double w = 1.0 / static_cast<double>(samples.size());
  l.atoms_ = std::move(samples);
  l.weights_.assign(l.atoms_.size(), w);
  l.expand();
  return l;
}

double Law::density(double t) const {
  if (!has_density_ || t <= lo_ || t >= hi_) return 0.0;
  switch (kind_) {
    case Kind::Semicircle: {
      const double m = params_[0], v = params_[1];
      const double x = t - m;
      return std::sqrt(std::max(0.0, 4.0 * v - x * x)) / (2.0 * kPi * v);
    }
    case Kind::MarchenkoPastur: {
      const double scale = params_[1];
      return std::sqrt(std::max(0.0, (hi_ - t) * (t - lo_))) / (2.0 * kPi * scale * t);
    }
    default: return 0.0;
  }
}

double Law::weight_fn(double theta) const {
  const double c = 0.5 * (lo_ + hi_), h = 0.5 * (hi_ - lo_);
  const double t = c + h * std::cos(theta);
  // rho(t) h sin(theta) with (hi - t)(t - lo) = h^2 sin^2(theta)
  const double st = std::sin(theta);
  if (kind_ == Kind::Semicircle) return h * h * st * st / (2.0 * kPi * params_[1]);
  if (kind_ == Kind::MarchenkoPastur) return h * h * st * st / (2.0 * kPi * params_[1] * t);
  return density(t) * h * std::sin(theta);
}

void Law::expand() {
  if (!atoms_.empty()) {
    cum_weights_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cum_weights_.begin());
  }
  if (!has_density_) return;
  // Cosine coefficients of w from values at interior Chebyshev angles.
  for (int n = 64;; n *= 2) {
    std::vector<double> vals(n);
    for (int j = 0; j < n; ++j) vals[j] = weight_fn((j + 0.5) * kPi / n);
    std::vector<double> c(n);
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += vals[j] * std::cos(k * (j + 0.5) * kPi / n);
      c[k] = 2.0 * s / n;
    }
    c[0] *= 0.5;
    double big = 0.0, tail = 0.0;
    for (int k = 0; k < n; ++k) big = std::max(big, std::abs(c[k]));
    for (int k = n / 2; k < n; ++k) tail = std::max(tail, std::abs(c[k]));
    if (tail <= 1e-13 * big || n >= 4096) {
      int keep = n;
      while (keep > 1 && std::abs(c[keep - 1]) <= 1e-14 * big) --keep;
      c.resize(keep);
      cheb_ = std::move(c);
      return;
    }
  }
}

double Law::continuous_mass() const {
  if (!has_density_ || cheb_.empty()) return 0.0;
  return kPi * cheb_[0];
}

double Law::atom_mass() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

std::pair<double, double> Law::support() const {
  double lo = INFINITY, hi = -INFINITY;
  if (has_density_) {
    lo = lo_;
    hi = hi_;
  }
  for (double a : atoms_) {
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return {lo, hi};
}

double Law::distance_to_support(Complex a) const {
  double d = INFINITY;
  if (has_density_) {
    const double x = std::clamp(a.real(), lo_, hi_);
    d = std::abs(a - Complex(x, 0.0));
  }
  for (double t : atoms_) d = std::min(d, std::abs(a - t));
  return d;
}

Complex Law::cauchy(Complex a) const {
  const double scale = std::max({1.0, std::abs(support().first), std::abs(support().second)});
  if (distance_to_support(a) <= 1e-12 * scale) {
    throw Error(ErrorCode::NearSingularResolvent, "freeprob", "point lies on the support",
                {{"re", a.real()}, {"im", a.imag()}});
  }
  Complex out(0.0, 0.0);
  for (std::size_t i = 0; i < atoms_.size(); ++i) out += weights_[i] / (a - atoms_[i]);
  if (has_density_) {
    // int_0^pi cos(k th) / (s - cos th) dth = pi zeta^k / r, r^2 = s^2 - 1, |zeta| < 1
    const double c = 0.5 * (lo_ + hi_), h = 0.5 * (hi_ - lo_);
    const Complex s = (a - c) / h;
    Complex r = std::sqrt(s - 1.0) * std::sqrt(s + 1.0);
    if (std::abs(s + r) < 1.0) r = -r;
    const Complex zeta = 1.0 / (s + r);
    Complex acc(0.0, 0.0);
    for (auto it = cheb_.rbegin(); it != cheb_.rend(); ++it) acc = acc * zeta + *it;
    out += kPi * acc / (h * r);
  }
  return out;
}

double Law::sample(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  const double am = atom_mass();
  if (!atoms_.empty() && u < am) {
    auto it = std::upper_bound(cum_weights_.begin(), cum_weights_.end(), u);
    const std::size_t i = std::min<std::size_t>(it - cum_weights_.begin(), atoms_.size() - 1);
    return atoms_[i];
  }
  if (!has_density_) return atoms_.back();
  // mass of t(theta..pi), theta in [0, pi], increasing as theta decreases
  const double target = (u - am);
  auto mass_beyond = [&](double th) {
    double m = cheb_[0] * (kPi - th);
    for (std::size_t k = 1; k < cheb_.size(); ++k) m -= cheb_[k] * std::sin(k * th) / k;
    return m;
  };
  double a = 0.0, b = kPi;  // mass_beyond(0) = total, mass_beyond(pi) = 0
  for (int it = 0; it < 56; ++it) {
    const double mid = 0.5 * (a + b);
    if (mass_beyond(mid) > target) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double c = 0.5 * (lo_ + hi_), h = 0.5 * (hi_ - lo_);
  return c + h * std::cos(0.5 * (a + b));
}

nlohmann::json Law::to_json() const {
  switch (kind_) {
    case Kind::Semicircle:
      return {{"type", "semicircle"}, {"mean", params_[0]}, {"variance", params_[1]}};
    case Kind::MarchenkoPastur:
      return {{"type", "marchenko_pastur"}, {"lambda", params_[0]}, {"scale", params_[1]}};
    case Kind::Atomic: return {{"type", "atomic"}, {"atoms", atoms_}, {"weights", weights_}};
    case Kind::Empirical: return {{"type", "empirical"}, {"samples", atoms_.size()}};
  }
  return {};
}

}  // namespace ncrat
