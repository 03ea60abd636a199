#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nuv/gaussian.hpp"

namespace nuv {

/// x_k = A x_{k-1} + B u_k + w_k,  y_k = C x_k,  k = 1..K.
///
/// `drive` holds the known exogenous terms w_k (empty means zero); it carries
/// gravity and forecast disturbances without adding Dirac-valued inputs.
struct LinearSSM {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  int K = 1;
  GaussianVecMsg x0;
  std::vector<Eigen::VectorXd> drive;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return C.rows(); }

  /// Throws DimensionMismatch / InvalidProblem.
  void validate() const;
  Eigen::VectorXd drive_at(int k) const;
};

/// Third-order low-pass filter: triple real pole at -omega0 (per sample),
/// zero-order-hold discretization with unit sample time, unity DC gain.
/// `input_copies` repeats the input column (for sum-of-channels inputs).
LinearSSM lowpass3(int K, double omega0 = 2.0 * 3.14159265358979323846 * 0.05, int input_copies = 1);

/// Zero-order-hold discretization of (Ac, Bc) with sample time dt.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize_zoh(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc,
                                                           double dt = 1.0);

/// Scalar Gaussian factor on row . x_k.
struct StateFunctionalFactor {
  Eigen::VectorXd row;
  GaussianMsg msg;
};

/// Vector Gaussian factor on map * x_k.
struct VectorFactor {
  Eigen::MatrixXd map;
  GaussianVecMsg msg;
};

/// Gaussian factors attached to the chain. All time indices are 1-based.
class FactorSet {
 public:
  FactorSet() = default;
  explicit FactorSet(const LinearSSM& model);

  /// Multiplies `msg` into the factor on input channel j at time k.
  void add_input(int k, int j, const GaussianMsg& msg);
  /// Factor on output channel i (row i of C).
  void add_output(int k, int i, const GaussianMsg& msg);
  void add_state_functional(int k, Eigen::VectorXd row, const GaussianMsg& msg);
  void add_output_vector(int k, const GaussianVecMsg& msg);

  int K() const { return static_cast<int>(inputs_.size()); }
  const GaussianMsg& input(int k, int j) const { return inputs_.at(k - 1).at(j); }
  const std::vector<StateFunctionalFactor>& functionals(int k) const { return functionals_.at(k - 1); }
  const std::vector<VectorFactor>& vectors(int k) const { return vectors_.at(k - 1); }

 private:
  void check_k(int k) const;

  Eigen::MatrixXd C_;
  std::vector<std::vector<GaussianMsg>> inputs_;
  std::vector<std::vector<StateFunctionalFactor>> functionals_;
  std::vector<std::vector<VectorFactor>> vectors_;
};

/// Marginal posterior of every u_k, x_k and y_k (vectors indexed k - 1).
struct Posterior {
  std::vector<Eigen::VectorXd> u_mean;
  std::vector<Eigen::VectorXd> u_var;
  std::vector<Eigen::VectorXd> x_mean;
  std::vector<Eigen::MatrixXd> x_cov;
  std::vector<Eigen::VectorXd> y_mean;
  std::vector<Eigen::VectorXd> y_var;
  Eigen::VectorXd x0_mean;
  Eigen::MatrixXd x0_cov;

  int K() const { return static_cast<int>(x_mean.size()); }
  double u(int k, int j) const { return u_mean.at(k - 1)(j); }
  double y(int k, int i) const { return y_mean.at(k - 1)(i); }
  GaussianMsg input_marginal(int k, int j) const;
  GaussianMsg functional_marginal(int k, const Eigen::VectorXd& row) const;
};

/// Exact Gaussian posterior by a backward information filter followed by a
/// forward marginal sweep. Linear in K.
Posterior smooth(const LinearSSM& model, const FactorSet& factors);

/// Normal equations N z = r over z = [x0; u_1; ...; u_K] with the states
/// substituted out. Shared by dense_solve and the gradient checks.
struct StackedQuadratic {
  Eigen::MatrixXd normal;
  Eigen::VectorXd rhs;
  /// x_k = state_map[k] * z + state_offset[k], k = 0..K
  std::vector<Eigen::MatrixXd> state_map;
  std::vector<Eigen::VectorXd> state_offset;
};

StackedQuadratic stack_quadratic(const LinearSSM& model, const FactorSet& factors);

/// O(K^3) reference with the same contract as smooth.
Posterior dense_solve(const LinearSSM& model, const FactorSet& factors);

struct Rollout {
  std::vector<Eigen::VectorXd> x;  // x_1..x_K
  std::vector<Eigen::VectorXd> y;  // y_1..y_K
};

/// Deterministic rollout from x0.mean. u must have K entries of dimension m.
Rollout simulate(const LinearSSM& model, const std::vector<Eigen::VectorXd>& u);

}  // namespace nuv
