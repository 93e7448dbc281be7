#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace ncrat {

using Complex = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

// Relative singular-value threshold deciding numerical invertibility.
inline constexpr double kInvertibilityTol = 1e-10;
// Relative threshold for numerical rank.
inline constexpr double kRankTol = 1e-10;

double max_norm(const MatC& a);
bool all_finite(const MatC& a);
bool is_hermitian(const MatC& a, double rel_tol = 1e-10);

// sigma_min / sigma_max. Exact via SVD for small matrices, LU condition
// estimate above kSvdCutoff.
inline constexpr Index kSvdCutoff = 128;
double inverse_condition(const MatC& a);
bool is_invertible(const MatC& a, double tol = kInvertibilityTol);

// Inverse when a passes the invertibility test, nullopt otherwise.
std::optional<MatC> try_inverse(const MatC& a, double tol = kInvertibilityTol);

// Inverse of [[A,B],[C,D]] through the Schur complement of D.
MatC schur_inverse(const MatC& a, const MatC& b, const MatC& c, const MatC& d);

// (B - B*) / 2i and (B + B*) / 2.
MatC imag_part(const MatC& b);
MatC real_part(const MatC& b);

double min_imag_eigenvalue(const MatC& b);
bool in_upper_half_plane(const MatC& b, double eps);

struct HermitianEig {
  VecR values;   // ascending
  MatC vectors;  // unitary, columns are eigenvectors
};
HermitianEig hermitian_eig(const MatC& a);

VecC general_eigenvalues(const MatC& a);

Index numerical_rank(const MatC& a, double rel_tol = kRankTol);

// Orthonormal basis of the column space. Singular values below
// rel_tol * max(sigma_max, scale) are dropped.
MatC orthonormal_range(const MatC& a, double rel_tol = kRankTol, double scale = 0.0);

// Orthonormal basis of the orthogonal complement of span(basis) in C^dim.
MatC orthogonal_complement(const MatC& basis, Index dim);

MatC kron(const MatC& a, const MatC& b);

// [[0, A], [A*, 0]]
MatC hermitize(const MatC& a);

MatC block_diag(const MatC& a, const MatC& b);

using Rng = std::mt19937_64;

// i.i.d. standard complex Gaussian entries, E|z|^2 = 1.
MatC random_gaussian(Index rows, Index cols, Rng& rng);
// (A + A*) / 2 for A = random_gaussian(n, n).
MatC random_hermitian(Index n, Rng& rng);
// Deterministic generator keyed by a list of integers.
Rng make_rng(std::initializer_list<std::uint64_t> keys);

}  // namespace ncrat
