#pragma once

#include <optional>
#include <vector>

#include "ncrat/freeprob.hpp"
#include "ncrat/linalg.hpp"
#include "ncrat/linrep.hpp"
#include "ncrat/ncexpr.hpp"
#include "ncrat/pencil.hpp"
#include "ncrat/realization.hpp"

namespace ncrat {

// r(x) = Delta + Xi* Lambda(x)^-1 Xi with Hermitian Delta and Lambda coefficients.
struct GeneralizedRealization {
  MatC delta;           // k x k
  MatC xi;              // N x k
  LinearPencil lambda;  // N x N

  Index corner() const { return delta.rows(); }
  Index state_dim() const { return lambda.rows(); }
  int arity() const { return lambda.arity(); }
};

MatC eval_generalized(const GeneralizedRealization& g, const MatTuple& x);

enum class RealizationPath { SaFlr, Minimal, Auto };

// Selfadjoint-valued FLR (values square) to a generalized realization of
// (r + r*)/2. Minimal goes through the doubled FLR, a cut-down and a
// signature-restoring change of state basis; Auto tries Minimal first.
GeneralizedRealization realize_flr(const Flr& rho, RealizationPath path);
GeneralizedRealization realize_at(const NcExpr& r, int arity, RealizationPath path);
GeneralizedRealization realize_at(const MatNcExpr& r, int arity, RealizationPath path);
// Realization of [[0, r], [r*, 0]].
GeneralizedRealization hermitized_realization(const NcExpr& r, int arity, RealizationPath path);

// (0, v, -Q)
GeneralizedRealization from_sa_flr(const SaFlr& rho);
// Selfadjoint descriptor realization (C = B*, J signature, A_j Hermitian) to
// (D, B, J - L_A).
GeneralizedRealization from_selfadjoint_realization(const Realization& r);
// Minimal realization of the same function in selfadjoint form.
Realization minimal_selfadjoint(const Realization& r);

// [[Delta, Xi*], [Xi, -Lambda(x)]]
struct ShiftedPencil {
  LinearPencil pencil;
  Index corner = 0;

  int arity() const { return pencil.arity(); }
  Index size() const { return pencil.rows(); }
};

ShiftedPencil build_shifted_pencil(const GeneralizedRealization& g);
// Schur complement of the lower right block at X; equals r(X).
MatC shifted_pencil_value(const ShiftedPencil& p, const MatTuple& x);

// eps_k = start * 2^-k until below final. Richardson values R_k = 2 G_k - G_{k-1}
// are accepted once |R_k - R_{k-1}| < accept_tol; if the schedule runs out the
// last value is kept when the last change is below fallback_tol.
struct EpsSchedule {
  double start = 0.1;
  double final_eps = 1e-7;
  double accept_tol = 1e-6;
  double fallback_tol = 1e-4;
};

struct CauchyDiagnostics {
  double eps_used = 0.0;
  double last_delta = 0.0;
  int levels = 0;
  int max_iterations = 0;
};

// Corner of G_{pencil(X)} at diag(B, i eps I) in the eps -> 0 limit. Keeps
// fixed-point state between calls, so nearby points are cheap.
class ExprCauchy {
 public:
  ExprCauchy(ShiftedPencil pencil, std::vector<Law> laws, EpsSchedule schedule = {},
             SubordinationOptions opts = {});

  MatC operator()(const MatC& b, CauchyDiagnostics* diag = nullptr);
  void forget_start() { cauchy_.forget_start(); }
  const ShiftedPencil& pencil() const { return pencil_; }

 private:
  ShiftedPencil pencil_;
  EpsSchedule schedule_;
  PencilCauchy cauchy_;
};

MatC cauchy_of_expr(const ShiftedPencil& pencil, const std::vector<Law>& laws, const MatC& b,
                    const EpsSchedule& schedule = {}, CauchyDiagnostics* diag = nullptr);

struct DensityGrid {
  std::vector<double> t;
  std::vector<double> density;  // NaN at gaps
  std::vector<std::size_t> gaps;
  double eta = 0.0;
  double eps_used = 0.0;
  double mass = 0.0;
  double clipped_mass = 0.0;
  int iterations_max_seen = 0;
};

// density = max(0, -Im G(t + i eta) / pi)
DensityGrid stieltjes_invert(const std::vector<double>& t, const std::vector<Complex>& g,
                             double eta);

std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

struct PipelineOptions {
  RealizationPath path = RealizationPath::Auto;
  EpsSchedule schedule{};
  SubordinationOptions subordination{};
  unsigned workers = 1;
};

DensityGrid compute_distribution(const NcExpr& r, int arity, const std::vector<Law>& laws,
                                 const std::vector<double>& t, double eta,
                                 const PipelineOptions& opts = {});

// Hermitization of r with its own Cauchy evaluator; eval(z) is the (2,1)
// entry of the corner at [[i eps, z], [conj z, i eps]].
class HermitizedCauchy {
 public:
  HermitizedCauchy(const NcExpr& r, int arity, std::vector<Law> laws, double eps,
                   const PipelineOptions& opts = {});
  Complex operator()(Complex z, CauchyDiagnostics* diag = nullptr);
  void forget_start() { cauchy_.forget_start(); }
  const ShiftedPencil& pencil() const { return cauchy_.pencil(); }

 private:
  double eps_;
  ExprCauchy cauchy_;
};

Complex hermitized_cauchy(const NcExpr& r, int arity, const std::vector<Law>& laws, Complex z,
                          double eps, const PipelineOptions& opts = {});

struct BrownGrid {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> density;  // row-major over y then x; NaN at gaps
  std::vector<std::size_t> gaps;
  double eps = 0.0;
  double mass = 0.0;
  double clipped_mass = 0.0;
  double imag_residue_max = 0.0;
  int iterations_max_seen = 0;

  double at(std::size_t iy, std::size_t ix) const { return density[iy * x.size() + ix]; }
};

BrownGrid compute_brown(const NcExpr& r, int arity, const std::vector<Law>& laws,
                        const std::vector<double>& x, const std::vector<double>& y, double eps,
                        const PipelineOptions& opts = {});

}  // namespace ncrat
