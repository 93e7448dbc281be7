#include "ncrat/pencil.hpp"

#include "ncrat/errors.hpp"

namespace ncrat {

Index tuple_dim(const MatTuple& x) {
  if (x.empty()) return 1;
  const Index n = x.front().rows();
  for (const auto& m : x) {
    if (m.rows() != n || m.cols() != n) {
      throw Error(ErrorCode::ShapeMismatch, "ncexpr", "matrix tuple entries differ in size");
    }
  }
  return n;
}

LinearPencil::LinearPencil(int arity, Index rows, Index cols)
    : rows_(rows), cols_(cols), coeffs_(arity + 1, MatC::Zero(rows, cols)) {}

LinearPencil::LinearPencil(std::vector<MatC> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "pencil needs at least a constant term");
  }
  rows_ = coeffs_.front().rows();
  cols_ = coeffs_.front().cols();
  for (const auto& c : coeffs_) {
    if (c.rows() != rows_ || c.cols() != cols_) {
      throw Error(ErrorCode::ShapeMismatch, "linrep", "pencil coefficients differ in shape");
    }
  }
}

LinearPencil LinearPencil::adjoint() const {
  std::vector<MatC> c;
  c.reserve(coeffs_.size());
  for (const auto& m : coeffs_) c.push_back(m.adjoint());
  return LinearPencil(std::move(c));
}

bool LinearPencil::is_hermitian(double tol) const {
  if (rows_ != cols_) return false;
  for (const auto& m : coeffs_)
    if (max_norm(m - m.adjoint()) > tol * std::max(1.0, max_norm(m))) return false;
  return true;
}

MatC LinearPencil::at(std::span<const Complex> x) const {
  if (static_cast<int>(x.size()) != arity()) {
    throw Error(ErrorCode::ShapeMismatch, "linrep", "pencil arity does not match point",
                {{"arity", arity()}, {"point", x.size()}});
  }
  MatC out = coeffs_[0];
  for (int j = 1; j <= arity(); ++j) out += x[j - 1] * coeffs_[j];
  return out;
}

LinearPencil LinearPencil::scaled(Complex s) const {
  std::vector<MatC> c;
  c.reserve(coeffs_.size());
  for (const auto& m : coeffs_) c.push_back(s * m);
  return LinearPencil(std::move(c));
}

LinearPencil LinearPencil::select(const std::vector<Index>& rows,
                                  const std::vector<Index>& cols) const {
  std::vector<MatC> c;
  c.reserve(coeffs_.size());
  for (const auto& m : coeffs_) {
    MatC s(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < cols.size(); ++k) s(i, k) = m(rows[i], cols[k]);
    c.push_back(std::move(s));
  }
  return LinearPencil(std::move(c));
}

MatC eval_pencil(const LinearPencil& q, const MatTuple& x) {
  if (static_cast<int>(x.size()) != q.arity()) {
    throw Error(ErrorCode::ShapeMismatch, "ncexpr", "pencil arity does not match tuple",
                {{"arity", q.arity()}, {"tuple", x.size()}});
  }
  const Index n = tuple_dim(x);
  MatC out = MatC::Zero(q.rows() * n, q.cols() * n);
  for (Index i = 0; i < q.rows(); ++i) {
    for (Index k = 0; k < q.cols(); ++k) {
      auto blk = out.block(i * n, k * n, n, n);
      const Complex c0 = q.coeff(0)(i, k);
      if (c0 != Complex(0.0)) blk.diagonal().array() += c0;
      for (int j = 1; j <= q.arity(); ++j) {
        const Complex c = q.coeff(j)(i, k);
        if (c != Complex(0.0)) blk += c * x[j - 1];
      }
    }
  }
  return out;
}

}  // namespace ncrat
