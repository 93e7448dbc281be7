#pragma once

#include <span>
#include <vector>

#include "ncrat/linalg.hpp"

namespace ncrat {

// Point (X_1, ..., X_g) of square matrices of one common size.
using MatTuple = std::vector<MatC>;

// Size of the matrices in X; throws ShapeMismatch if they differ.
Index tuple_dim(const MatTuple& x);

// Affine matrix pencil Q(x) = Q0 + sum_j Qj x_j with coefficients of one shape.
class LinearPencil {
 public:
  LinearPencil() = default;
  LinearPencil(int arity, Index rows, Index cols);
  explicit LinearPencil(std::vector<MatC> coeffs);

  int arity() const { return static_cast<int>(coeffs_.size()) - 1; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  const MatC& coeff(int j) const { return coeffs_.at(j); }
  MatC& coeff(int j) { return coeffs_.at(j); }
  const std::vector<MatC>& coeffs() const { return coeffs_; }

  LinearPencil adjoint() const;
  bool is_hermitian(double tol = 1e-12) const;
  // Q0 + sum_j Qj x_j at scalar x.
  MatC at(std::span<const Complex> x) const;
  LinearPencil scaled(Complex s) const;
  // Keep the listed rows and columns.
  LinearPencil select(const std::vector<Index>& rows, const std::vector<Index>& cols) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<MatC> coeffs_{MatC()};
};

// Q0 (x) I_n + sum_j Qj (x) X_j, block (i,k) of size n x n.
MatC eval_pencil(const LinearPencil& q, const MatTuple& x);

}  // namespace ncrat
