#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nuv/error.hpp"
#include "nuv/ssm.hpp"
#include "random_ssm.hpp"

using namespace nuv;
using namespace nuv::testing;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LinearSSM scalar_chain(int K) {
  LinearSSM m;
  m.A = MatrixXd::Identity(1, 1);
  m.B = MatrixXd::Identity(1, 1);
  m.C = MatrixXd::Identity(1, 1);
  m.K = K;
  m.x0 = GaussianVecMsg::isotropic(VectorXd::Zero(1), kVarianceFloor);
  return m;
}

}  // namespace

TEST_CASE("smooth: identity chain") {
  const LinearSSM m = scalar_chain(1);
  FactorSet f(m);
  f.add_output(1, 0, {3.0, 1.0});
  const Posterior post = smooth(m, f);
  CHECK(post.u(1, 0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(post.y(1, 0) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("smooth: two-step chain against the dense solve") {
  const LinearSSM m = scalar_chain(2);
  FactorSet f(m);
  for (int k = 1; k <= 2; ++k) {
    f.add_output(k, 0, {1.0, 1.0});
    f.add_input(k, 0, {0.0, 1.0});
  }
  const Posterior s = smooth(m, f);
  const Posterior d = dense_solve(m, f);
  // by hand: minimize u1^2 + u2^2 + (u1 - 1)^2 + (u1 + u2 - 1)^2 -> u1 = 0.6, u2 = 0.2
  CHECK(s.u(1, 0) == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(s.u(2, 0) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(d.u(1, 0) == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(d.u(2, 0) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(s.u_var[0](0) == doctest::Approx(d.u_var[0](0)).epsilon(1e-10));
}

TEST_CASE("property: smooth matches dense_solve on random models") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomCase c = random_case(rng);
    const Posterior s = smooth(c.model, c.factors);
    const Posterior d = dense_solve(c.model, c.factors);
    REQUIRE(max_rel(s.u_mean, d.u_mean) <= 1e-8);
    REQUIRE(max_rel(s.x_mean, d.x_mean) <= 1e-8);
    REQUIRE(max_rel(s.y_mean, d.y_mean) <= 1e-8);
    REQUIRE(max_rel(s.u_var, d.u_var) <= 1e-8);
    REQUIRE(max_rel(s.y_var, d.y_var) <= 1e-8);
    for (int k = 1; k <= c.model.K; ++k)
      REQUIRE((s.y_mean[k - 1] - c.model.C * s.x_mean[k - 1]).cwiseAbs().maxCoeff() <= 1e-9);

    // smoother means are the stationary point of the stacked quadratic
    const StackedQuadratic q = stack_quadratic(c.model, c.factors);
    VectorXd z(q.rhs.size());
    z.head(c.model.n()) = s.x0_mean;
    for (int k = 1; k <= c.model.K; ++k) z.segment(c.model.n() + (k - 1) * c.model.m(), c.model.m()) = s.u_mean[k - 1];
    const double grad = (q.normal * z - q.rhs).cwiseAbs().maxCoeff();
    REQUIRE(grad <= 1e-8 * std::max(1.0, q.rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("smooth: near-Dirac factors stay accurate") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const LinearSSM m = lowpass3(60, 0.3 + 0.05 * trial);
    FactorSet f(m);
    for (int k = 1; k <= m.K; ++k) {
      f.add_input(k, 0, {0.0, 4.0});
      f.add_output(k, 0, {std::sin(0.1 * k) + 0.1 * g(rng), 0.05});
    }
    // pins as produced by floored NUV variances at active constraints
    for (int k = 10; k <= m.K; k += 9) f.add_output(k, 0, {0.5, kVarianceFloor});
    for (int k = 3; k <= m.K; k += 7) f.add_input(k, 0, {-0.25, kVarianceFloor});
    const Posterior s = smooth(m, f);
    const Posterior d = dense_solve(m, f);
    REQUIRE(max_rel(s.u_mean, d.u_mean) <= 1e-4);
    REQUIRE(max_rel(s.y_mean, d.y_mean) <= 1e-4);
    for (int k = 10; k <= m.K; k += 9) REQUIRE(std::abs(s.y(k, 0) - 0.5) <= 1e-9);
    for (int k = 3; k <= m.K; k += 7) REQUIRE(std::abs(s.u(k, 0) + 0.25) <= 1e-9);
    for (int k = 1; k <= m.K; ++k) REQUIRE(s.y_var[k - 1](0) >= 0.0);
  }
}

TEST_CASE("smooth: flat factors change nothing") {
  std::mt19937_64 rng(33);
  RandomCase c = random_case(rng);
  const Posterior before = smooth(c.model, c.factors);
  c.factors.add_output(1, 0, GaussianMsg::flat());
  c.factors.add_input(c.model.K, 0, GaussianMsg::flat());
  const Posterior after = smooth(c.model, c.factors);
  for (int k = 0; k < c.model.K; ++k) {
    REQUIRE((before.u_mean[k].array() == after.u_mean[k].array()).all());
    REQUIRE((before.x_mean[k].array() == after.x_mean[k].array()).all());
    REQUIRE((before.x_cov[k].array() == after.x_cov[k].array()).all());
  }
}

TEST_CASE("dense_solve examples") {
  LinearSSM m;
  m.A = MatrixXd::Identity(2, 2) * 0.5;
  m.B = MatrixXd::Ones(2, 1);
  m.C = MatrixXd::Identity(2, 2);
  m.K = 5;
  m.x0 = GaussianVecMsg::isotropic(VectorXd::Zero(2), 1.0);
  FactorSet f(m);
  for (int k = 1; k <= m.K; ++k) f.add_input(k, 0, {0.0, 1.0});
  Posterior d = dense_solve(m, f);
  for (int k = 1; k <= m.K; ++k) CHECK(std::abs(d.u(k, 0)) < 1e-14);
  CHECK(d.x0_mean.cwiseAbs().maxCoeff() < 1e-14);

  f.add_input(3, 0, {1.75, kVarianceFloor});
  d = dense_solve(m, f);
  CHECK(d.u(3, 0) == doctest::Approx(1.75).epsilon(1e-9));
  CHECK(smooth(m, f).u(3, 0) == doctest::Approx(1.75).epsilon(1e-9));
}

TEST_CASE("vector output observations") {
  LinearSSM m;
  m.A = MatrixXd::Identity(2, 2);
  m.B = MatrixXd::Identity(2, 2);
  m.C = MatrixXd::Identity(2, 2);
  m.K = 3;
  m.x0 = GaussianVecMsg::isotropic(VectorXd::Zero(2), 1e-6);
  FactorSet f(m);
  MatrixXd cov(2, 2);
  cov << 1.0, 0.4, 0.4, 2.0;
  for (int k = 1; k <= 3; ++k) {
    f.add_input(k, 0, {0.0, 1.0});
    f.add_input(k, 1, {0.0, 1.0});
    f.add_output_vector(k, GaussianVecMsg(Eigen::Vector2d(k, -k), cov));
  }
  CHECK(max_rel(smooth(m, f).x_mean, dense_solve(m, f).x_mean) <= 1e-10);
}

TEST_CASE("errors") {
  LinearSSM m = scalar_chain(2);
  FactorSet f(m);
  try {
    smooth(m, f);
    FAIL("expected UnderdeterminedModel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnderdeterminedModel);
  }
  CHECK_THROWS_AS(dense_solve(m, f), Error);
  CHECK_THROWS_AS(f.add_output(3, 0, {0.0, 1.0}), Error);
  CHECK_THROWS_AS(f.add_output(1, 1, {0.0, 1.0}), Error);
  LinearSSM bad = m;
  bad.B = MatrixXd::Ones(2, 1);
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(simulate(m, std::vector<VectorXd>(1, VectorXd::Zero(1))), Error);
}

TEST_CASE("simulate") {
  SUBCASE("zero input, zero start") {
    const LinearSSM m = lowpass3(20);
    const Rollout r = simulate(m, std::vector<VectorXd>(20, VectorXd::Zero(1)));
    for (const auto& y : r.y) CHECK(y(0) == 0.0);
  }
  SUBCASE("pass-through system") {
    LinearSSM m;
    m.A = MatrixXd::Zero(2, 2);
    m.B = MatrixXd::Identity(2, 2);
    m.C = MatrixXd::Identity(2, 2);
    m.K = 4;
    m.x0 = GaussianVecMsg::isotropic(VectorXd::Ones(2), 1.0);
    std::vector<VectorXd> u;
    for (int k = 0; k < 4; ++k) u.push_back(Eigen::Vector2d(k, -2.0 * k));
    const Rollout r = simulate(m, u);
    for (int k = 0; k < 4; ++k) CHECK((r.y[k] - u[k]).norm() == 0.0);
  }
  SUBCASE("low-pass step response") {
    const LinearSSM m = lowpass3(200);
    const double dc = (m.C * (MatrixXd::Identity(3, 3) - m.A).inverse() * m.B)(0, 0);
    CHECK(dc == doctest::Approx(1.0).epsilon(1e-12));
    const Rollout r = simulate(m, std::vector<VectorXd>(200, VectorXd::Ones(1)));
    for (int k = 1; k < 200; ++k) CHECK(r.y[k](0) >= r.y[k - 1](0));
    CHECK(r.y.back()(0) == doctest::Approx(dc).epsilon(1e-6));
  }
}
