#include "ncrat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ncrat/errors.hpp"

namespace ncrat {

double max_norm(const MatC& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

bool all_finite(const MatC& a) { return a.allFinite(); }

bool is_hermitian(const MatC& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(max_norm(a), 1e-300);
  return max_norm(a - a.adjoint()) <= rel_tol * scale;
}

double inverse_condition(const MatC& a) {
  if (a.rows() != a.cols()) return 0.0;
  if (a.size() == 0) return 1.0;
  if (!a.allFinite()) return 0.0;
  if (a.rows() <= kSvdCutoff) {
    Eigen::BDCSVD<MatC> svd(a);
    const VecR& s = svd.singularValues();
    if (s(0) == 0.0) return 0.0;
    return s(s.size() - 1) / s(0);
  }
  Eigen::PartialPivLU<MatC> lu(a);
  const double rc = lu.rcond();
  // an exactly zero pivot makes the estimate NaN
  return std::isfinite(rc) ? rc : 0.0;
}

bool is_invertible(const MatC& a, double tol) { return inverse_condition(a) > tol; }

std::optional<MatC> try_inverse(const MatC& a, double tol) {
  if (a.rows() != a.cols()) return std::nullopt;
  if (a.size() == 0) return MatC(0, 0);
  if (!a.allFinite()) return std::nullopt;
  if (a.rows() <= kSvdCutoff) {
    Eigen::BDCSVD<MatC> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VecR& s = svd.singularValues();
    if (s(0) == 0.0 || s(s.size() - 1) <= tol * s(0)) return std::nullopt;
    return MatC(svd.matrixV() * s.cwiseInverse().cast<Complex>().asDiagonal() *
                svd.matrixU().adjoint());
  }
  Eigen::PartialPivLU<MatC> lu(a);
  if (!(lu.rcond() > tol)) return std::nullopt;
  return MatC(lu.inverse());
}

MatC schur_inverse(const MatC& a, const MatC& b, const MatC& c, const MatC& d) {
  const Index k = a.rows();
  const Index l = d.rows();
  if (a.cols() != k || b.rows() != k || b.cols() != l || c.rows() != l || c.cols() != k ||
      d.cols() != l) {
    throw Error(ErrorCode::ShapeMismatch, "linalg", "schur_inverse block shapes do not fit");
  }
  auto d_inv = try_inverse(d);
  if (!d_inv) {
    throw Error(ErrorCode::SingularBlock, "linalg", "D block is not invertible",
                {{"which", "D"}, {"tolerance", kInvertibilityTol}});
  }
  const MatC s = a - b * (*d_inv) * c;
  auto s_inv = try_inverse(s);
  if (!s_inv) {
    throw Error(ErrorCode::SingularBlock, "linalg", "Schur complement is not invertible",
                {{"which", "schur_complement"}, {"tolerance", kInvertibilityTol}});
  }
  MatC out(k + l, k + l);
  const MatC bd = b * (*d_inv);
  const MatC dc = (*d_inv) * c;
  out.topLeftCorner(k, k) = *s_inv;
  out.topRightCorner(k, l) = -(*s_inv) * bd;
  out.bottomLeftCorner(l, k) = -dc * (*s_inv);
  out.bottomRightCorner(l, l) = *d_inv + dc * (*s_inv) * bd;
  return out;
}

MatC imag_part(const MatC& b) { return (b - b.adjoint()) / Complex(0.0, 2.0); }

MatC real_part(const MatC& b) { return (b + b.adjoint()) / 2.0; }

double min_imag_eigenvalue(const MatC& b) {
  if (b.size() == 0) return INFINITY;
  Eigen::SelfAdjointEigenSolver<MatC> es(imag_part(b), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool in_upper_half_plane(const MatC& b, double eps) {
  if (b.rows() != b.cols()) return false;
  return min_imag_eigenvalue(b) >= eps;
}

HermitianEig hermitian_eig(const MatC& a) {
  if (!is_hermitian(a, 1e-10)) {
    throw Error(ErrorCode::NotHermitian, "linalg", "matrix is not Hermitian",
                {{"deviation", max_norm(a - a.adjoint())}});
  }
  Eigen::SelfAdjointEigenSolver<MatC> es(real_part(a));
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "linalg", "Hermitian eigensolver failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

VecC general_eigenvalues(const MatC& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "linalg", "eigenvalues of a non-square matrix");
  }
  if (a.size() == 0) return VecC(0);
  Eigen::ComplexEigenSolver<MatC> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "linalg", "complex eigensolver failed");
  }
  return es.eigenvalues();
}

Index numerical_rank(const MatC& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<MatC> svd(a);
  const VecR& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

MatC orthonormal_range(const MatC& a, double rel_tol, double scale) {
  if (a.size() == 0) return MatC(a.rows(), 0);
  Eigen::BDCSVD<MatC> svd(a, Eigen::ComputeThinU);
  const VecR& s = svd.singularValues();
  const double cut = rel_tol * std::max(s(0), scale);
  Index r = 0;
  while (r < s.size() && s(r) > cut && s(r) > 0.0) ++r;
  return svd.matrixU().leftCols(r);
}

MatC orthogonal_complement(const MatC& basis, Index dim) {
  if (basis.cols() == 0) return MatC::Identity(dim, dim);
  if (basis.cols() >= dim) return MatC(dim, 0);
  Eigen::HouseholderQR<MatC> qr(basis);
  MatC q = qr.householderQ() * MatC::Identity(dim, dim);
  return q.rightCols(dim - basis.cols());
}

MatC kron(const MatC& a, const MatC& b) {
  MatC out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

MatC hermitize(const MatC& a) {
  const Index m = a.rows(), n = a.cols();
  MatC out = MatC::Zero(m + n, m + n);
  out.topRightCorner(m, n) = a;
  out.bottomLeftCorner(n, m) = a.adjoint();
  return out;
}

MatC block_diag(const MatC& a, const MatC& b) {
  MatC out = MatC::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

MatC random_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  MatC out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      out(i, j) = Complex(re, im);
    }
  return out;
}

MatC random_hermitian(Index n, Rng& rng) {
  const MatC a = random_gaussian(n, n, rng);
  return (a + a.adjoint()) / 2.0;
}

Rng make_rng(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  for (auto k : keys) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace ncrat
