#pragma once

#include <cstdint>
#include <vector>

#include "ncrat/algorithms.hpp"
#include "ncrat/freeprob.hpp"
#include "ncrat/linalg.hpp"
#include "ncrat/ncexpr.hpp"

namespace ncrat {

// Random Hermitian matrix model for one variable.
class Ensemble {
 public:
  enum class Kind { Gue, Wishart, FromLaw };

  // (A + A*)/2 scaled to semicircle(mean, variance) in the limit.
  static Ensemble gue(Index n, double variance = 1.0, double mean = 0.0);
  // scale * (1/m) W W* with W n x m complex Gaussian, m = round(n / aspect).
  static Ensemble wishart(Index n, double aspect = 1.0, double scale = 1.0);
  // U diag(i.i.d. draws from law) U* with Haar U.
  static Ensemble from_law(Index n, Law law);
  // The standard model for a law: GUE for semicircles, Wishart for
  // Marchenko-Pastur, from_law otherwise.
  static Ensemble for_law(Index n, const Law& law);

  Kind kind() const { return kind_; }
  Index dim() const { return n_; }

  MatC sample(Rng& rng) const;

 private:
  Ensemble(Kind kind, Index n, double a, double b, Law law);
  Kind kind_;
  Index n_;
  double a_;
  double b_;
  Law law_;
};

MatC haar_unitary(Index n, Rng& rng);

struct SpectrumPool {
  std::vector<double> real;      // sorted, selfadjoint path
  std::vector<Complex> complex;  // general path, sorted by (re, im)
  int draws = 0;
  int discarded = 0;
};

// Pools eigenvalues of r over reps independent draws. Draw (rep, j) uses the
// stream make_rng({seed, rep, j}).
SpectrumPool empirical_spectrum(const NcExpr& r, const std::vector<Ensemble>& ensembles,
                                int reps, std::uint64_t seed, bool selfadjoint,
                                unsigned workers = 1);

struct DensityComparison {
  double l1 = 0.0;
  double ks = 0.0;
};

DensityComparison compare_density(const DensityGrid& d, const std::vector<double>& pool,
                                  int bins);

// Fraction of the pool landing in cells whose density exceeds the q-quantile
// of the positive density values.
double brown_coverage(const BrownGrid& b, const std::vector<Complex>& pool, double q);

}  // namespace ncrat
