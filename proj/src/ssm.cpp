#include "nuv/ssm.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

#include "nuv/error.hpp"

namespace nuv {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double factor_precision(const GaussianMsg& msg) {
  if (msg.is_flat()) return 0.0;
  return 1.0 / floor_variance(msg.variance);
}

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Inverse of an SPD matrix, or UnderdeterminedModel.
MatrixXd spd_inverse(const MatrixXd& m, const char* what) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::UnderdeterminedModel, what);
  return symmetrize(llt.solve(MatrixXd::Identity(m.rows(), m.cols())));
}

// Information-form contributions of all factors attached to x_k.
void add_state_factors(const FactorSet& factors, int k, MatrixXd& W, VectorXd& xi) {
  for (const auto& f : factors.functionals(k)) {
    const double w = factor_precision(f.msg);
    if (w == 0.0) continue;
    W.noalias() += w * f.row * f.row.transpose();
    xi.noalias() += (w * f.msg.mean) * f.row;
  }
  for (const auto& f : factors.vectors(k)) {
    const MatrixXd P = f.msg.precision();
    W.noalias() += f.map.transpose() * P * f.map;
    xi.noalias() += f.map.transpose() * (P * f.msg.mean);
  }
}

void input_information(const FactorSet& factors, int k, Eigen::Index m, VectorXd& w_u, VectorXd& xi_u) {
  w_u.resize(m);
  xi_u.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const GaussianMsg& msg = factors.input(k, static_cast<int>(j));
    w_u(j) = factor_precision(msg);
    xi_u(j) = w_u(j) * msg.mean;
  }
}

void check_shapes(const LinearSSM& model, const FactorSet& factors) {
  model.validate();
  if (factors.K() != model.K) throw Error(ErrorKind::DimensionMismatch, "factor set horizon differs from model");
  for (int k = 1; k <= model.K; ++k) {
    for (const auto& f : factors.functionals(k))
      if (f.row.size() != model.n()) throw Error(ErrorKind::DimensionMismatch, "functional row has wrong length");
    for (const auto& f : factors.vectors(k))
      if (f.map.cols() != model.n() || f.map.rows() != f.msg.dim())
        throw Error(ErrorKind::DimensionMismatch, "vector factor map has wrong shape");
  }
}

void check_finite(const Posterior& post) {
  auto bad = [](const auto& v) {
    for (const auto& e : v)
      if (!e.allFinite()) return true;
    return false;
  };
  if (bad(post.x_mean) || bad(post.u_mean) || bad(post.x_cov) || bad(post.u_var))
    throw Error(ErrorKind::UnderdeterminedModel, "posterior is not finite");
}

void fill_outputs(const LinearSSM& model, Posterior& post) {
  post.y_mean.resize(model.K);
  post.y_var.resize(model.K);
  for (int k = 0; k < model.K; ++k) {
    post.y_mean[k] = model.C * post.x_mean[k];
    post.y_var[k] = (model.C * post.x_cov[k] * model.C.transpose()).diagonal();
  }
}

}  // namespace

void LinearSSM::validate() const {
  if (K < 1) throw Error(ErrorKind::InvalidProblem, "horizon K must be >= 1");
  if (A.rows() != A.cols()) throw Error(ErrorKind::DimensionMismatch, "A must be square");
  if (B.rows() != n()) throw Error(ErrorKind::DimensionMismatch, "B must have n rows");
  if (C.cols() != n()) throw Error(ErrorKind::DimensionMismatch, "C must have n columns");
  if (x0.dim() != n() || x0.covariance.rows() != n() || x0.covariance.cols() != n())
    throw Error(ErrorKind::DimensionMismatch, "x0 must have dimension n");
  if (!drive.empty()) {
    if (static_cast<int>(drive.size()) != K) throw Error(ErrorKind::DimensionMismatch, "drive must have K entries");
    for (const auto& w : drive)
      if (w.size() != n()) throw Error(ErrorKind::DimensionMismatch, "drive entries must have dimension n");
  }
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !x0.mean.allFinite() || !x0.covariance.allFinite())
    throw Error(ErrorKind::InvalidProblem, "model matrices must be finite");
}

VectorXd LinearSSM::drive_at(int k) const { return drive.empty() ? VectorXd::Zero(n()) : drive.at(k - 1); }

std::pair<MatrixXd, MatrixXd> discretize_zoh(const MatrixXd& Ac, const MatrixXd& Bc, double dt) {
  const Eigen::Index n = Ac.rows();
  const Eigen::Index m = Bc.cols();
  MatrixXd aug = MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = Ac * dt;
  aug.topRightCorner(n, m) = Bc * dt;
  const MatrixXd e = aug.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

LinearSSM lowpass3(int K, double omega0, int input_copies) {
  // cascade of three identical first-order lags, each with unit DC gain
  MatrixXd Ac = MatrixXd::Zero(3, 3);
  Ac << -omega0, 0.0, 0.0, omega0, -omega0, 0.0, 0.0, omega0, -omega0;
  MatrixXd Bc = MatrixXd::Zero(3, 1);
  Bc(0, 0) = omega0;
  auto [Ad, Bd] = discretize_zoh(Ac, Bc);

  LinearSSM model;
  model.A = Ad;
  model.B = Bd.replicate(1, input_copies);
  model.C = MatrixXd::Zero(1, 3);
  model.C(0, 2) = 1.0;
  model.K = K;
  model.x0 = GaussianVecMsg::isotropic(VectorXd::Zero(3), 1e6);
  return model;
}

FactorSet::FactorSet(const LinearSSM& model)
    : C_(model.C),
      inputs_(model.K, std::vector<GaussianMsg>(model.m(), GaussianMsg::flat())),
      functionals_(model.K),
      vectors_(model.K) {}

void FactorSet::check_k(int k) const {
  if (k < 1 || k > K()) throw Error(ErrorKind::DimensionMismatch, "time index " + std::to_string(k) + " out of range");
}

void FactorSet::add_input(int k, int j, const GaussianMsg& msg) {
  check_k(k);
  auto& slot = inputs_[k - 1].at(j);
  slot = multiply(slot, msg);
}

void FactorSet::add_output(int k, int i, const GaussianMsg& msg) {
  if (i < 0 || i >= C_.rows()) throw Error(ErrorKind::DimensionMismatch, "output channel out of range");
  add_state_functional(k, C_.row(i).transpose(), msg);
}

void FactorSet::add_state_functional(int k, VectorXd row, const GaussianMsg& msg) {
  check_k(k);
  functionals_[k - 1].push_back({std::move(row), msg});
}

void FactorSet::add_output_vector(int k, const GaussianVecMsg& msg) {
  check_k(k);
  if (msg.dim() != C_.rows()) throw Error(ErrorKind::DimensionMismatch, "output observation has wrong dimension");
  vectors_[k - 1].push_back({C_, msg});
}

GaussianMsg Posterior::input_marginal(int k, int j) const { return {u_mean.at(k - 1)(j), u_var.at(k - 1)(j)}; }

GaussianMsg Posterior::functional_marginal(int k, const VectorXd& row) const {
  return {row.dot(x_mean.at(k - 1)), row.dot(x_cov.at(k - 1) * row)};
}

Posterior smooth(const LinearSSM& model, const FactorSet& factors) {
  check_shapes(model, factors);
  const int K = model.K;
  const Eigen::Index n = model.n();
  const Eigen::Index m = model.m();
  const MatrixXd& A = model.A;
  const MatrixXd& B = model.B;

  // u_k | x_{k-1}, data ~ N(gain[k] x_{k-1} + offset[k], cond_cov[k])
  std::vector<MatrixXd> gain(K), closed(K), cond_cov(K);
  std::vector<VectorXd> offset(K);

  MatrixXd W = MatrixXd::Zero(n, n);
  VectorXd xi = VectorXd::Zero(n);
  VectorXd w_u, xi_u;
  for (int k = K; k >= 1; --k) {
    add_state_factors(factors, k, W, xi);
    xi.noalias() -= W * model.drive_at(k);
    input_information(factors, k, m, w_u, xi_u);

    const MatrixXd WB = W * B;
    MatrixXd H = B.transpose() * WB;
    H.diagonal() += w_u;
    Eigen::LLT<MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::UnderdeterminedModel, "input u_" + std::to_string(k) + " is not determined");

    const int i = k - 1;
    gain[i] = -llt.solve(WB.transpose() * A);
    offset[i] = llt.solve(B.transpose() * xi + xi_u);
    cond_cov[i] = symmetrize(llt.solve(MatrixXd::Identity(m, m)));
    closed[i] = A + B * gain[i];

    // square-form update keeps W positive semidefinite with near-Dirac factors
    const VectorXd xi_next = closed[i].transpose() * (xi - WB * offset[i]) +
                             gain[i].transpose() * (xi_u - w_u.cwiseProduct(offset[i]));
    MatrixXd W_next = closed[i].transpose() * W * closed[i] + gain[i].transpose() * w_u.asDiagonal() * gain[i];
    W = symmetrize(W_next);
    xi = xi_next;
  }

  Posterior post;
  const MatrixXd P0 = model.x0.precision();
  const MatrixXd V0 = spd_inverse(P0 + W, "initial state is not determined");
  post.x0_cov = V0;
  post.x0_mean = V0 * (P0 * model.x0.mean + xi);

  post.u_mean.resize(K);
  post.u_var.resize(K);
  post.x_mean.resize(K);
  post.x_cov.resize(K);
  VectorXd x = post.x0_mean;
  MatrixXd S = post.x0_cov;
  for (int i = 0; i < K; ++i) {
    post.u_mean[i] = gain[i] * x + offset[i];
    post.u_var[i] = (gain[i] * S * gain[i].transpose() + cond_cov[i]).diagonal();
    x = closed[i] * x + B * offset[i] + model.drive_at(i + 1);
    S = symmetrize(closed[i] * S * closed[i].transpose() + B * cond_cov[i] * B.transpose());
    post.x_mean[i] = x;
    post.x_cov[i] = S;
  }
  fill_outputs(model, post);
  check_finite(post);
  return post;
}

StackedQuadratic stack_quadratic(const LinearSSM& model, const FactorSet& factors) {
  check_shapes(model, factors);
  const int K = model.K;
  const Eigen::Index n = model.n();
  const Eigen::Index m = model.m();
  const Eigen::Index dim = n + K * m;

  StackedQuadratic q;
  q.normal = MatrixXd::Zero(dim, dim);
  q.rhs = VectorXd::Zero(dim);

  const MatrixXd P0 = model.x0.precision();
  q.normal.topLeftCorner(n, n) = P0;
  q.rhs.head(n) = P0 * model.x0.mean;

  q.state_map.resize(K + 1);
  q.state_offset.resize(K + 1);
  q.state_map[0] = MatrixXd::Zero(n, dim);
  q.state_map[0].leftCols(n).setIdentity();
  q.state_offset[0] = VectorXd::Zero(n);

  VectorXd w_u, xi_u;
  for (int k = 1; k <= K; ++k) {
    const Eigen::Index col = n + (k - 1) * m;
    MatrixXd map = model.A * q.state_map[k - 1];
    map.middleCols(col, m) += model.B;
    q.state_map[k] = map;
    q.state_offset[k] = model.A * q.state_offset[k - 1] + model.drive_at(k);

    input_information(factors, k, m, w_u, xi_u);
    q.normal.diagonal().segment(col, m) += w_u;
    q.rhs.segment(col, m) += xi_u;

    MatrixXd W = MatrixXd::Zero(n, n);
    VectorXd xi = VectorXd::Zero(n);
    add_state_factors(factors, k, W, xi);
    // factor on x_k = map z + offset
    q.normal.noalias() += map.transpose() * W * map;
    q.rhs.noalias() += map.transpose() * (xi - W * q.state_offset[k]);
  }
  return q;
}

Posterior dense_solve(const LinearSSM& model, const FactorSet& factors) {
  const StackedQuadratic q = stack_quadratic(model, factors);
  const int K = model.K;
  const Eigen::Index n = model.n();
  const Eigen::Index m = model.m();

  Eigen::LDLT<MatrixXd> ldlt(q.normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
    throw Error(ErrorKind::UnderdeterminedModel, "normal matrix is singular");
  const VectorXd z = ldlt.solve(q.rhs);
  const MatrixXd cov = symmetrize(ldlt.solve(MatrixXd::Identity(q.normal.rows(), q.normal.cols())));

  Posterior post;
  post.x0_mean = z.head(n);
  post.x0_cov = cov.topLeftCorner(n, n);
  post.u_mean.resize(K);
  post.u_var.resize(K);
  post.x_mean.resize(K);
  post.x_cov.resize(K);
  for (int k = 1; k <= K; ++k) {
    const Eigen::Index col = n + (k - 1) * m;
    post.u_mean[k - 1] = z.segment(col, m);
    post.u_var[k - 1] = cov.diagonal().segment(col, m);
    post.x_mean[k - 1] = q.state_map[k] * z + q.state_offset[k];
    post.x_cov[k - 1] = symmetrize(q.state_map[k] * cov * q.state_map[k].transpose());
  }
  fill_outputs(model, post);
  check_finite(post);
  return post;
}

Rollout simulate(const LinearSSM& model, const std::vector<VectorXd>& u) {
  model.validate();
  if (static_cast<int>(u.size()) != model.K) throw Error(ErrorKind::DimensionMismatch, "input sequence must have K entries");
  Rollout r;
  r.x.reserve(model.K);
  r.y.reserve(model.K);
  VectorXd x = model.x0.mean;
  for (int k = 1; k <= model.K; ++k) {
    if (u[k - 1].size() != model.m()) throw Error(ErrorKind::DimensionMismatch, "input has wrong dimension");
    x = model.A * x + model.B * u[k - 1] + model.drive_at(k);
    r.x.push_back(x);
    r.y.push_back(model.C * x);
  }
  return r;
}

}  // namespace nuv
