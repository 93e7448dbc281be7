#pragma once

#include <cstdint>
#include <span>

#include "ncrat/linalg.hpp"
#include "ncrat/ncexpr.hpp"
#include "ncrat/pencil.hpp"
#include "ncrat/realization.hpp"

namespace ncrat {

// Formal linear representation: r(X) = -u Q(X)^-1 v.
struct Flr {
  MatC u;          // d1 x n
  LinearPencil q;  // n x n
  MatC v;          // n x d2

  Index size() const { return q.rows(); }
  Index out_rows() const { return u.rows(); }
  Index out_cols() const { return v.cols(); }
  int arity() const { return q.arity(); }
};

// Selfadjoint representation: r(X) = -v* Q(X)^-1 v with Hermitian coefficients.
struct SaFlr {
  LinearPencil q;
  MatC v;  // n x d

  Index size() const { return q.rows(); }
  int arity() const { return q.arity(); }
};

// Scalar affine function lambda_0 + sum_j lambda_j x_j (coeffs.size() = arity + 1).
Flr flr_affine(std::span<const Complex> coeffs);
// Matrix-valued affine pencil Lambda(x) of size d1 x d2.
Flr flr_affine(const LinearPencil& lambda);

Flr flr_add(const Flr& a, const Flr& b);
Flr flr_mul(const Flr& a, const Flr& b);
Flr flr_inv(const Flr& a);
Flr flr_adjoint(const Flr& a);
// c * r, same pencil.
Flr flr_scale(Complex c, const Flr& a);

Flr build_flr(const NcExpr& r, int arity);
Flr build_flr(const MatNcExpr& r, int arity);

SaFlr make_selfadjoint_flr(const Flr& rho, bool normalize_q0);
// Selfadjoint representation of [[0, r], [r*, 0]].
SaFlr hermitize_flr(const Flr& rho);

// rho represents r - D.
Realization flr_to_realization(const Flr& rho, const MatC& d);
// rho represents r - delta and was built with normalize_q0.
Realization sa_flr_to_realization(const SaFlr& rho, const MatC& delta);
// Realization built from the FLR of r - D with D = r(0) when every entry is
// regular at 0, and D = 0 otherwise.
Realization realization_of(const MatNcExpr& r, int arity, bool prune = false);
Realization realization_of(const NcExpr& r, int arity, bool prune = false);
// Monic realization D + C (I - L_A)^-1 B written back as an FLR of r - D.
Flr realization_to_flr(const Realization& r);

// Structural pruning of rows/columns that cannot influence -uQ^-1v.
Flr prune_flr(const Flr& rho, std::uint64_t seed = 0);

// Throws DomainError when Q(X) fails the invertibility test.
MatC eval_flr(const Flr& rho, const MatTuple& x);
MatC eval_sa_flr(const SaFlr& rho, const MatTuple& x);

}  // namespace ncrat
