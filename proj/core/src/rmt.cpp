#include "ncrat/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "ncrat/errors.hpp"

namespace ncrat {

Ensemble::Ensemble(Kind kind, Index n, double a, double b, Law law)
    : kind_(kind), n_(n), a_(a), b_(b), law_(std::move(law)) {
  if (n < 1) throw Error(ErrorCode::ConfigError, "rmt", "ensemble dimension must be positive");
}

Ensemble Ensemble::gue(Index n, double variance, double mean) {
  return Ensemble(Kind::Gue, n, variance, mean, Law::semicircle(mean, variance));
}

Ensemble Ensemble::wishart(Index n, double aspect, double scale) {
  if (!(aspect > 0.0) || !(scale > 0.0)) {
    throw Error(ErrorCode::ConfigError, "rmt", "aspect and scale must be positive");
  }
  return Ensemble(Kind::Wishart, n, aspect, scale, Law::marchenko_pastur(1.0 / aspect, scale * aspect));
}

Ensemble Ensemble::from_law(Index n, Law law) { return Ensemble(Kind::FromLaw, n, 0.0, 0.0, std::move(law)); }

Ensemble Ensemble::for_law(Index n, const Law& law) {
  switch (law.kind()) {
    case Law::Kind::Semicircle: return gue(n, law.params()[1], law.params()[0]);
    case Law::Kind::MarchenkoPastur: {
      // MP(rate, s) is the limit of (s * rate) times the aspect 1/rate Wishart matrix
      const double rate = law.params()[0], s = law.params()[1];
      return wishart(n, 1.0 / rate, s * rate);
    }
    default: return from_law(n, law);
  }
}

MatC haar_unitary(Index n, Rng& rng) {
  const MatC z = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<MatC> qr(z);
  MatC q = qr.householderQ() * MatC::Identity(n, n);
  const MatC r = qr.matrixQR();
  for (Index k = 0; k < n; ++k) {
    const Complex d = r(k, k);
    const double a = std::abs(d);
    if (a > 0.0) q.col(k) *= d / a;
  }
  return q;
}

MatC Ensemble::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Gue: {
      const MatC h = random_hermitian(n_, rng);
      MatC x = std::sqrt(2.0 * a_ / static_cast<double>(n_)) * h;
      x.diagonal().array() += b_;
      return 0.5 * (x + x.adjoint());
    }
    case Kind::Wishart: {
      const Index m = std::max<Index>(1, std::llround(static_cast<double>(n_) / a_));
      const MatC w = random_gaussian(n_, m, rng);
      const MatC x = (b_ / static_cast<double>(m)) * (w * w.adjoint());
      return 0.5 * (x + x.adjoint());
    }
    case Kind::FromLaw: {
      VecC d(n_);
      for (Index i = 0; i < n_; ++i) d(i) = law_.sample(rng);
      const MatC u = haar_unitary(n_, rng);
      const MatC x = u * d.asDiagonal() * u.adjoint();
      return 0.5 * (x + x.adjoint());
    }
  }
  return {};
}

SpectrumPool empirical_spectrum(const NcExpr& r, const std::vector<Ensemble>& ensembles,
                                int reps, std::uint64_t seed, bool selfadjoint, unsigned workers) {
  if (r.max_var() > static_cast<int>(ensembles.size())) {
    throw Error(ErrorCode::ArityError, "rmt", "expression uses more variables than ensembles",
                {{"max_var", r.max_var()}, {"ensembles", ensembles.size()}});
  }
  if (reps < 1) throw Error(ErrorCode::ConfigError, "rmt", "reps must be positive");
  std::vector<std::vector<double>> re(reps);
  std::vector<std::vector<Complex>> cx(reps);
  std::vector<char> ok(reps, 0);

  auto run = [&](int rep) {
    MatTuple x;
    for (std::size_t j = 0; j < ensembles.size(); ++j) {
      Rng rng = make_rng({seed, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(j)});
      x.push_back(ensembles[j].sample(rng));
    }
    MatC value;
    try {
      value = eval_expr(r, x);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DomainError) return;
      throw;
    }
    ok[rep] = 1;
    if (selfadjoint) {
      const VecR ev = hermitian_eig(0.5 * (value + value.adjoint())).values;
      re[rep].assign(ev.data(), ev.data() + ev.size());
    } else {
      const VecC ev = general_eigenvalues(value);
      cx[rep].assign(ev.data(), ev.data() + ev.size());
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(reps)));
  if (workers == 1) {
    for (int rep = 0; rep < reps; ++rep) run(rep);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex mu;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int rep = static_cast<int>(w); rep < reps; rep += static_cast<int>(workers)) {
          try {
            run(rep);
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

  SpectrumPool out;
  out.draws = reps;
  for (int rep = 0; rep < reps; ++rep) {
    if (!ok[rep]) {
      ++out.discarded;
      continue;
    }
    out.real.insert(out.real.end(), re[rep].begin(), re[rep].end());
    out.complex.insert(out.complex.end(), cx[rep].begin(), cx[rep].end());
  }
  if (2 * out.discarded > out.draws) {
    throw Error(ErrorCode::DomainStarved, "rmt", "most draws fell outside the domain",
                {{"draws", out.draws}, {"discarded", out.discarded}});
  }
  std::sort(out.real.begin(), out.real.end());
  std::sort(out.complex.begin(), out.complex.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return out;
}

DensityComparison compare_density(const DensityGrid& d, const std::vector<double>& pool, int bins) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, "rmt", "eigenvalue pool is empty");
  if (bins < 1 || d.t.size() < 2) {
    throw Error(ErrorCode::ConfigError, "rmt", "need at least one bin and two grid points");
  }
  const std::vector<double>& t = d.t;
  const std::size_t n = t.size();
  auto rho = [&](std::size_t i) { return std::isnan(d.density[i]) ? 0.0 : d.density[i]; };
  // cumulative integral of the piecewise linear density
  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) cum[i] = cum[i - 1] + 0.5 * (t[i] - t[i - 1]) * (rho(i - 1) + rho(i));
  auto cdf = [&](double s) {
    if (s <= t.front()) return 0.0;
    if (s >= t.back()) return cum.back();
    const std::size_t i = std::upper_bound(t.begin(), t.end(), s) - t.begin();  // t[i-1] <= s < t[i]
    const double h = t[i] - t[i - 1], a = s - t[i - 1];
    const double ra = rho(i - 1), rb = rho(i);
    return cum[i - 1] + a * ra + 0.5 * a * a * (rb - ra) / h;
  };

  std::vector<double> sorted = pool;
  std::sort(sorted.begin(), sorted.end());
  const double total = static_cast<double>(sorted.size());
  auto emp = [&](double s) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin()) / total;
  };

  const double lo = t.front(), hi = t.back(), w = (hi - lo) / bins;
  DensityComparison out;
  double inside = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + b * w, c = b + 1 == bins ? hi : lo + (b + 1) * w;
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), a);
    const auto last = b + 1 == bins ? std::upper_bound(sorted.begin(), sorted.end(), c)
                                    : std::lower_bound(sorted.begin(), sorted.end(), c);
    const double p = static_cast<double>(last - first) / total;
    inside += p;
    out.l1 += std::abs(p - (cdf(c) - cdf(a)));
  }
  out.l1 += std::max(0.0, 1.0 - inside);
  for (std::size_t i = 0; i < n; ++i) out.ks = std::max(out.ks, std::abs(emp(t[i]) - cum[i]));
  for (double s : sorted) out.ks = std::max(out.ks, std::abs(emp(s) - cdf(s)));
  return out;
}

double brown_coverage(const BrownGrid& b, const std::vector<Complex>& pool, double q) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, "rmt", "eigenvalue pool is empty");
  if (!(q >= 0.0 && q < 1.0)) throw Error(ErrorCode::ConfigError, "rmt", "quantile must lie in [0, 1)");
  std::vector<double> positive;
  for (double v : b.density)
    if (v > 0.0) positive.push_back(v);
  if (positive.empty()) return 0.0;
  std::sort(positive.begin(), positive.end());
  const double threshold = positive[static_cast<std::size_t>(q * (positive.size() - 1))];

  // cell edges at midpoints between grid nodes, half a step beyond the ends
  auto edges = [](const std::vector<double>& s) {
    std::vector<double> e(s.size() + 1);
    for (std::size_t i = 1; i < s.size(); ++i) e[i] = 0.5 * (s[i - 1] + s[i]);
    e.front() = s.front() - 0.5 * (s[1] - s[0]);
    e.back() = s.back() + 0.5 * (s[s.size() - 1] - s[s.size() - 2]);
    return e;
  };
  const std::vector<double> ex = edges(b.x), ey = edges(b.y);
  auto cell = [](const std::vector<double>& e, double v) -> long {
    if (v < e.front() || v > e.back()) return -1;
    const long i = static_cast<long>(std::upper_bound(e.begin(), e.end(), v) - e.begin()) - 1;
    return std::min<long>(i, static_cast<long>(e.size()) - 2);
  };
  std::size_t hits = 0;
  for (Complex z : pool) {
    const long ix = cell(ex, z.real()), iy = cell(ey, z.imag());
    if (ix < 0 || iy < 0) continue;
    const double v = b.at(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
    if (v > threshold || (v == threshold && v == positive.back())) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pool.size());
}

}  // namespace ncrat
