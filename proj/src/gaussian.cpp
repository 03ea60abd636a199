#include "nuv/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nuv/error.hpp"

namespace nuv {

GaussianMsg GaussianMsg::from_precision(double precision, double weighted_mean) {
  if (precision <= 0.0) return flat();
  if (precision == kInf) throw Error(ErrorKind::InvalidProblem, "infinite precision has no moment form");
  return {weighted_mean / precision, 1.0 / precision};
}

GaussianMsg multiply(const GaussianMsg& m1, const GaussianMsg& m2) {
  if (m1.is_flat()) return m2;
  if (m2.is_flat()) return m1;
  if (m1.is_dirac() && m2.is_dirac()) {
    if (m1.mean != m2.mean) throw Error(ErrorKind::InconsistentDirac, "two Dirac messages at different points");
    return m1;
  }
  if (m1.is_dirac()) return m1;
  if (m2.is_dirac()) return m2;

  const double w = 1.0 / m1.variance + 1.0 / m2.variance;
  const double xi = m1.mean / m1.variance + m2.mean / m2.variance;
  // convex combination of the two means; clamp absorbs the last-ulp rounding
  const double lo = std::min(m1.mean, m2.mean);
  const double hi = std::max(m1.mean, m2.mean);
  return {std::clamp(xi / w, lo, hi), 1.0 / w};
}

GaussianMsg divide(const GaussianMsg& product, const GaussianMsg& factor) {
  if (factor.is_flat()) return product;
  const double w = product.precision() - factor.precision();
  if (!(w > 0.0)) return GaussianMsg::flat();
  return GaussianMsg::from_precision(w, product.weighted_mean() - factor.weighted_mean());
}

double log_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - d * d / (2.0 * variance);
}

double log_density(double x, const GaussianMsg& msg) { return log_density(x, msg.mean, msg.variance); }

double log_scale_factor(const GaussianMsg& m1, const GaussianMsg& m2) {
  const double v = m1.variance + m2.variance;
  if (!(v > 0.0)) throw Error(ErrorKind::InvalidProblem, "scale factor needs a positive total variance");
  return log_density(0.0, m1.mean - m2.mean, v);
}

double scale_factor(const GaussianMsg& m1, const GaussianMsg& m2) { return std::exp(log_scale_factor(m1, m2)); }

GaussianVecMsg GaussianVecMsg::isotropic(const Eigen::VectorXd& mean, double variance) {
  return {mean, Eigen::MatrixXd::Identity(mean.size(), mean.size()) * variance};
}

bool GaussianVecMsg::is_valid() const {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) return false;
  if (!mean.allFinite() || !covariance.allFinite()) return false;
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
  if (mean.size() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -1e-10;
}

Eigen::MatrixXd GaussianVecMsg::precision() const {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(covariance);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
    throw Error(ErrorKind::InvalidProblem, "covariance is singular");
  return ldlt.solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

Eigen::VectorXd GaussianVecMsg::weighted_mean() const { return precision() * mean; }

GaussianVecMsg GaussianVecMsg::from_information(const Eigen::MatrixXd& precision, const Eigen::VectorXd& weighted_mean) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
    throw Error(ErrorKind::UnderdeterminedModel, "precision matrix is singular");
  const Eigen::Index n = precision.rows();
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
  cov = 0.5 * (cov + cov.transpose());
  return {ldlt.solve(weighted_mean), cov};
}

GaussianVecMsg multiply(const GaussianVecMsg& m1, const GaussianVecMsg& m2) {
  if (m1.dim() != m2.dim()) throw Error(ErrorKind::DimensionMismatch, "vector messages differ in dimension");
  const Eigen::MatrixXd w1 = m1.precision();
  const Eigen::MatrixXd w2 = m2.precision();
  return GaussianVecMsg::from_information(w1 + w2, w1 * m1.mean + w2 * m2.mean);
}

}  // namespace nuv
