#pragma once

#include <optional>
#include <vector>

#include "ncrat/linalg.hpp"
#include "ncrat/ncexpr.hpp"
#include "ncrat/pencil.hpp"

namespace ncrat {

// Descriptor realization D + C (J - sum_j A_j x_j)^-1 B with J a signature matrix.
struct Realization {
  MatC d;  // d1 x d2
  MatC c;  // d1 x n
  MatC j;  // n x n
  std::vector<MatC> a;
  MatC b;  // n x d2

  int arity() const { return static_cast<int>(a.size()); }
  Index state_dim() const { return j.rows(); }
  Index out_rows() const { return d.rows(); }
  Index out_cols() const { return d.cols(); }

  bool is_monic(double tol = 1e-10) const;
  bool is_selfadjoint(double tol = 1e-10) const;
  // Shapes fit together and J* = J, J^2 = I. Throws ShapeMismatch / NotSignature.
  void validate() const;
};

Realization make_realization(MatC d, MatC c, MatC j, std::vector<MatC> a, MatC b);

// (D, C, I, J A_j, J B)
Realization monic_form(const Realization& r);

// [[J - L_A(x), B], [C, -D]]
LinearPencil sys_matrix(const Realization& r);

MatC controllable_space(const Realization& r);
MatC unobservable_space(const Realization& r);

// Restrict to the controllable space, then compress away the unobservable
// part. Output is monic and minimal.
Realization cut_down(const Realization& r);

// Coefficient of x_{w1}...x_{wk}: C JA_{w1} ... JA_{wk} JB, and D + CJB for the empty word.
MatC realization_series_coeff(const Realization& r, const Word& w);

// S with S A_j = A~_j S, S B = B~, C = C~ S for monic minimal r1, r2 (r2 = tilde).
std::optional<MatC> check_similarity(const Realization& r1, const Realization& r2);

MatC eval_realization(const Realization& r, const MatTuple& x);

}  // namespace ncrat
