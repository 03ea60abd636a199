#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <vector>

#include "nuv/ssm.hpp"

namespace nuv::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double max_rel(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b) {
  double scale = 1.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, b[i].cwiseAbs().maxCoeff());
    diff = std::max(diff, (a[i] - b[i]).cwiseAbs().maxCoeff());
  }
  return diff / scale;
}

struct RandomCase {
  LinearSSM model;
  FactorSet factors;
};

inline RandomCase random_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dn(1, 4), dm(1, 2), dp(1, 2), dk(1, 30);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> logv(-2.0, 1.5);
  std::bernoulli_distribution sparse(0.3);

  LinearSSM model;
  const int n = dn(rng), m = dm(rng), p = dp(rng);
  model.K = dk(rng);
  MatrixXd A(n, n);
  for (int i = 0; i < n * n; ++i) A.data()[i] = g(rng);
  const double radius = Eigen::EigenSolver<MatrixXd>(A).eigenvalues().cwiseAbs().maxCoeff();
  model.A = A * (0.95 / std::max(radius, 1e-3));
  model.B = MatrixXd(n, m);
  for (int i = 0; i < n * m; ++i) model.B.data()[i] = g(rng);
  model.C = MatrixXd(p, n);
  for (int i = 0; i < p * n; ++i) model.C.data()[i] = g(rng);
  VectorXd x0(n);
  for (int i = 0; i < n; ++i) x0(i) = g(rng);
  model.x0 = GaussianVecMsg::isotropic(x0, std::pow(10.0, logv(rng)));
  if (sparse(rng)) {
    model.drive.resize(model.K);
    for (auto& w : model.drive) {
      w = VectorXd(n);
      for (int i = 0; i < n; ++i) w(i) = g(rng);
    }
  }

  FactorSet f(model);
  for (int k = 1; k <= model.K; ++k) {
    for (int j = 0; j < m; ++j) f.add_input(k, j, {g(rng), std::pow(10.0, logv(rng))});
    for (int i = 0; i < p; ++i)
      if (!sparse(rng)) f.add_output(k, i, {3.0 * g(rng), std::pow(10.0, logv(rng))});
    if (sparse(rng)) {
      VectorXd row(n);
      for (int i = 0; i < n; ++i) row(i) = g(rng);
      f.add_state_functional(k, row, {g(rng), std::pow(10.0, logv(rng))});
    }
  }
  return {std::move(model), std::move(f)};
}

}  // namespace nuv::testing
