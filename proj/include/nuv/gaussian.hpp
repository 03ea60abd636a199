#pragma once

#include <Eigen/Dense>
#include <limits>

namespace nuv {

/// Variances produced by NUV updates are floored to this value before any
/// inversion. Zero variance is still representable (explicit Dirac).
inline constexpr double kVarianceFloor = 1e-12;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double floor_variance(double v) { return v < kVarianceFloor ? kVarianceFloor : v; }

/// Scalar Gaussian message in moment form. A flat message carries
/// variance = +inf (precision 0), a Dirac carries variance = 0.
struct GaussianMsg {
  double mean = 0.0;
  double variance = kInf;

  static GaussianMsg flat() { return {0.0, kInf}; }
  static GaussianMsg from_precision(double precision, double weighted_mean);

  bool is_flat() const { return variance == kInf; }
  bool is_dirac() const { return variance == 0.0; }

  double precision() const { return is_flat() ? 0.0 : 1.0 / variance; }
  double weighted_mean() const { return is_flat() ? 0.0 : mean / variance; }
};

/// Normalized product of two scalar Gaussians (precision-add, weighted-mean-add).
/// Throws ErrorKind::InconsistentDirac for two Diracs at different points.
GaussianMsg multiply(const GaussianMsg& m1, const GaussianMsg& m2);

/// Removes `factor` from `product`, i.e. the inverse of multiply. Returns a flat
/// message when the precisions cancel.
GaussianMsg divide(const GaussianMsg& product, const GaussianMsg& factor);

/// x-independent scale of the product: N(0; m1.mean - m2.mean, m1.variance + m2.variance).
double scale_factor(const GaussianMsg& m1, const GaussianMsg& m2);
double log_scale_factor(const GaussianMsg& m1, const GaussianMsg& m2);

/// log N(x; mean, variance).
double log_density(double x, const GaussianMsg& msg);
double log_density(double x, double mean, double variance);

/// Vector Gaussian in moment form.
struct GaussianVecMsg {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  GaussianVecMsg() = default;
  GaussianVecMsg(Eigen::VectorXd m, Eigen::MatrixXd cov) : mean(std::move(m)), covariance(std::move(cov)) {}

  static GaussianVecMsg isotropic(const Eigen::VectorXd& mean, double variance);

  Eigen::Index dim() const { return mean.size(); }

  /// Symmetric to 1e-12 and eigenvalues >= -1e-10.
  bool is_valid() const;

  /// Information form (W, W m). Requires a nonsingular covariance.
  Eigen::MatrixXd precision() const;
  Eigen::VectorXd weighted_mean() const;

  static GaussianVecMsg from_information(const Eigen::MatrixXd& precision, const Eigen::VectorXd& weighted_mean);
};

GaussianVecMsg multiply(const GaussianVecMsg& m1, const GaussianVecMsg& m2);

}  // namespace nuv
