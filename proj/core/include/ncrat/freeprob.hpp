#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncrat/linalg.hpp"

namespace ncrat {

// Compactly supported probability law on the real line: an absolutely
// continuous part on [lo, hi] plus finitely many atoms.
class Law {
 public:
  enum class Kind { Semicircle, MarchenkoPastur, Atomic, Empirical };

  static Law semicircle(double mean, double variance);
  static Law marchenko_pastur(double rate, double scale);
  static Law atomic(std::vector<double> atoms, std::vector<double> weights);
  // Equal weights on the samples.
  static Law empirical(std::vector<double> samples);

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }

  bool has_density() const { return has_density_; }
  std::pair<double, double> density_support() const { return {lo_, hi_}; }
  // Density of the continuous part; 0 off [lo, hi].
  double density(double t) const;
  double continuous_mass() const;
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  std::pair<double, double> support() const;
  double total_mass() const { return continuous_mass() + atom_mass(); }
  double atom_mass() const;

  // Integral of 1/(a - t) against the law; a must stay off the support.
  Complex cauchy(Complex a) const;
  // Distance from a to the support.
  double distance_to_support(Complex a) const;

  // One draw (inverse CDF on the continuous part).
  double sample(Rng& rng) const;

  nlohmann::json to_json() const;

 private:
  Law() = default;
  void expand();
  double weight_fn(double theta) const;

  Kind kind_ = Kind::Atomic;
  std::vector<double> params_;
  bool has_density_ = false;
  double lo_ = 0.0, hi_ = 0.0;
  // density in theta: w(theta) = rho(c + h cos theta) h sin theta = sum_k cheb_[k] cos(k theta)
  std::vector<double> cheb_;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cum_weights_;
};

Complex scalar_cauchy(const Law& mu, Complex z);
// Integral of (A - t)^-1 against the law.
MatC matricial_cauchy(const Law& mu, const MatC& a);
// Cauchy transform of Lambda (x) X at B for X distributed as mu.
MatC opval_cauchy_tensor(const MatC& lambda, const Law& mu, const MatC& b);

MatC f_transform(const MatC& g);
MatC h_transform(const MatC& b, const MatC& g_at_b);

struct CauchyValue {
  MatC g;
  MatC h;
};

// Operator-valued selfadjoint variable seen through its Cauchy and h transforms.
class OperatorVariable {
 public:
  virtual ~OperatorVariable() = default;
  virtual Index dim() const = 0;
  virtual CauchyValue eval(const MatC& b) = 0;
  virtual std::unique_ptr<OperatorVariable> clone() const = 0;
};

// Lambda (x) X with Lambda Hermitian.
class TensorVariable final : public OperatorVariable {
 public:
  TensorVariable(MatC lambda, Law law);
  Index dim() const override { return lambda_.rows(); }
  CauchyValue eval(const MatC& b) override;
  std::unique_ptr<OperatorVariable> clone() const override;

 private:
  MatC lambda_;
  Law law_;
  MatC u_nonzero_;  // eigenvectors of the nonzero eigenvalues
  MatC u_zero_;
  VecR eig_nonzero_;
};

struct SubordinationOptions {
  double tol = 1e-11;
  int max_iter = 20000;
  double damping = 1.0;
  double fallback_damping = 0.5;
  int stall_window = 50;
};

struct SubordinationResult {
  MatC omega1;
  MatC omega2;
  MatC g_sum;
  int iterations = 0;
  double last_delta = 0.0;
};

using HTransform = std::function<MatC(const MatC&)>;

// Fixed point of W -> hY(hX(W) + B) + B. g_sum is filled only by the
// variable-based overload below; here it stays empty.
SubordinationResult subordinate_pair(const HTransform& hx, const HTransform& hy, const MatC& b,
                                     const SubordinationOptions& opts = {},
                                     const MatC* start = nullptr);

// Same iteration for two operator variables; g_sum = G_X(omega1).
SubordinationResult subordinate_pair(OperatorVariable& x, OperatorVariable& y, const MatC& b,
                                     const SubordinationOptions& opts = {},
                                     const MatC* start = nullptr);

// X + Y for free X, Y, evaluated through subordination. Remembers the last
// omega1 as the starting point of the next evaluation.
class SumVariable final : public OperatorVariable {
 public:
  SumVariable(std::unique_ptr<OperatorVariable> x, std::unique_ptr<OperatorVariable> y,
              SubordinationOptions opts, int* max_iter_seen = nullptr);
  Index dim() const override { return x_->dim(); }
  CauchyValue eval(const MatC& b) override;
  std::unique_ptr<OperatorVariable> clone() const override;
  void set_counter(int* max_iter_seen);
  void forget_start();

 private:
  std::unique_ptr<OperatorVariable> x_;
  std::unique_ptr<OperatorVariable> y_;
  SubordinationOptions opts_;
  int* max_iter_seen_ = nullptr;
  MatC last_omega_;
};

struct PencilTerm {
  MatC lambda;
  Law law;
};

// G of Lambda0 + sum_j Lambda_j (x) X_j at B, with free X_j.
class PencilCauchy {
 public:
  PencilCauchy(MatC lambda0, std::vector<PencilTerm> terms, SubordinationOptions opts = {});
  PencilCauchy(const PencilCauchy& other);
  PencilCauchy& operator=(const PencilCauchy&) = delete;

  Index dim() const { return lambda0_.rows(); }
  MatC operator()(const MatC& b);
  int max_iterations_seen() const { return max_iter_seen_; }
  void forget_start();

 private:
  void build();
  MatC lambda0_;
  std::vector<PencilTerm> terms_;
  SubordinationOptions opts_;
  std::unique_ptr<OperatorVariable> var_;
  int max_iter_seen_ = 0;
};

MatC pencil_sum_cauchy(const MatC& lambda0, const std::vector<PencilTerm>& terms, const MatC& b,
                       const SubordinationOptions& opts = {});

}  // namespace ncrat
