#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nuv/error.hpp"
#include "nuv/scalar_lab.hpp"

using namespace nuv;

namespace {

constexpr double kStep = 1e-4;

double oracle(const ScalarProblem& p) {
  double lo = p.mu, hi = p.mu;
  std::visit(
      [&](const auto& s) {
        if constexpr (requires { s.b; }) {
          lo = std::min(lo, s.a);
          hi = std::max(hi, s.b);
        } else {
          lo = std::min(lo, s.a);
          hi = std::max(hi, s.a);
        }
      },
      p.prior);
  lo -= 1.0;
  hi += 1.0;
  return brute_force_map(p, lo, hi, kStep);
}

ConstraintPrior random_prior(std::mt19937_64& rng, int type) {
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  std::uniform_real_distribution<double> width(0.2, 4.0);
  std::uniform_real_distribution<double> loggamma(std::log(0.5), std::log(50.0));
  const double gamma = std::exp(loggamma(rng));
  switch (type) {
    case 0: return LaplaceSpec{pos(rng), gamma};
    case 1: {
      const double a = pos(rng);
      return BoxSpec{a, a + width(rng), gamma};
    }
    case 2: return HalfSpaceSpec{pos(rng), Side::RightOf, gamma};
    default: return HalfSpaceSpec{pos(rng), Side::LeftOf, gamma};
  }
}

}  // namespace

TEST_CASE("scalar_map_solve examples") {
  const BoxSpec box{-1.0, 1.0, 1.0};
  SUBCASE("mean inside the box") {
    const auto r = scalar_map_solve({0.0, 1.0, box});
    CHECK(r.converged);
    CHECK(r.x_hat == doctest::Approx(0.0));
  }
  SUBCASE("threshold met: estimate lands on the bound") {
    const ScalarProblem p{2.0, 1.0, box};
    const auto r = scalar_map_solve(p);
    CHECK(r.converged);
    CHECK(r.x_hat == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(std::abs(oracle(p) - 1.0) <= kStep);
  }
  SUBCASE("threshold missed: stationary point mu - 2 gamma s^2") {
    const ScalarProblem p{2.0, 0.25, box};
    const auto r = scalar_map_solve(p);
    CHECK(r.converged);
    CHECK(r.x_hat == doctest::Approx(1.5).epsilon(1e-7));
    CHECK(std::abs(oracle(p) - 1.5) <= kStep);
  }
  SUBCASE("right half-space") {
    const ScalarProblem p{-1.0, 1.0, HalfSpaceSpec{0.0, Side::RightOf, 1.0}};
    const auto r = scalar_map_solve(p);
    CHECK(r.converged);
    CHECK(std::abs(r.x_hat) < 1e-7);
    CHECK(std::abs(oracle(p)) <= kStep);
  }
}

TEST_CASE("scalar_map_solve rejects bad input") {
  const BoxSpec box{-1.0, 1.0, 1.0};
  for (const ScalarProblem& p : {ScalarProblem{NAN, 1.0, box}, ScalarProblem{0.0, INFINITY, box},
                                 ScalarProblem{0.0, 0.0, box}}) {
    try {
      scalar_map_solve(p);
      FAIL("expected InvalidProblem");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidProblem);
    }
  }
  CHECK_THROWS_AS(scalar_map_solve({0.0, 1.0, box}, 0.0, 0.0, 10), Error);
  CHECK_THROWS_AS(scalar_map_solve({0.0, 1.0, box}, 0.0, 1e-9, 0), Error);
}

TEST_CASE("non-convergence is reported") {
  const auto r = scalar_map_solve({3.0, 1.0, BoxSpec{-1.0, 1.0, 1.0}}, 3.0, 1e-9, 3);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK(r.objective_trace.size() == 4);
}

TEST_CASE("feasibility_threshold") {
  CHECK(feasibility_threshold(2.0, BoxSpec{-1.0, 1.0, 1.0}) == 0.5);
  CHECK(feasibility_threshold(0.0, BoxSpec{-1.0, 1.0, 1.0}) == 0.0);
  CHECK(feasibility_threshold(-1.0, HalfSpaceSpec{0.0, Side::RightOf, 1.0}) == 0.5);
  CHECK(feasibility_threshold(1.0, HalfSpaceSpec{0.0, Side::RightOf, 1.0}) == 0.0);
  CHECK(feasibility_threshold(3.0, HalfSpaceSpec{1.0, Side::LeftOf, 2.0}) == 0.5);
  CHECK_THROWS_AS(feasibility_threshold(0.0, LaplaceSpec{}), Error);
  CHECK_THROWS_AS(feasibility_threshold(0.0, BinarySpec{}), Error);
}

TEST_CASE("brute_force_map") {
  CHECK(std::abs(brute_force_map({0.3, 1.0, BoxSpec{-1e9, 1e9, 1.0}}, -5.0, 5.0, kStep) - 0.3) <= kStep);
  CHECK(std::abs(brute_force_map({2.0, 1.0, BoxSpec{-1.0, 1.0, 1.0}}, -3.0, 4.0, kStep) - 1.0) <= kStep);
  CHECK(std::abs(brute_force_map({-3.0, 0.25, HalfSpaceSpec{0.0, Side::RightOf, 1.0}}, -5.0, 2.0, kStep) + 2.5) <=
        kStep);
  // plateau-free problems only; ties resolve to the smallest x
  CHECK(brute_force_map({0.0, 1.0, BoxSpec{-1.0, 1.0, 1.0}}, -1.0, 1.0, 0.5) == 0.0);
  CHECK_THROWS_AS(brute_force_map({0.0, 1.0, BinarySpec{}}, -1.0, 1.0, 0.1), Error);
}

TEST_CASE("characteristic_sweep") {
  std::vector<double> mu;
  for (int i = 0; i <= 80; ++i) mu.push_back(-4.0 + 0.1 * i);
  SweepOptions opt;
  opt.oracle_step = 1e-3;

  SUBCASE("box, s^2 = 1") {
    const BoxSpec box{-1.0, 1.0, 1.0};
    const auto rows = characteristic_sweep(box, mu, {1.0}, opt);
    REQUIRE(rows.size() == mu.size());
    for (const auto& r : rows) {
      if (feasibility_threshold(r.mu, box) <= 1.0 / 1.05) CHECK(std::abs(r.x_hat) <= 1.0 + 1e-6);
      if (r.converged) CHECK(std::abs(r.x_hat - r.oracle_x_hat) <= 10 * opt.oracle_step);
    }
  }
  SUBCASE("half-space diagonal") {
    const HalfSpaceSpec hs{0.0, Side::RightOf, 1.0};
    for (const auto& r : characteristic_sweep(hs, mu, {0.1, 1.0}, opt))
      if (r.mu >= 0.0) CHECK(r.x_hat == doctest::Approx(r.mu).epsilon(1e-12));
  }
  SUBCASE("box transition at mu = 1 + 2 gamma s^2") {
    const BoxSpec box{-1.0, 1.0, 1.0};
    const double s2 = 0.25;
    const std::vector<double> around{1.4, 1.45, 1.55, 1.6};
    const auto rows = characteristic_sweep(box, around, {s2}, opt);
    CHECK(rows[0].feasible);
    CHECK(rows[1].feasible);
    CHECK_FALSE(rows[2].feasible);
    CHECK_FALSE(rows[3].feasible);
  }
  CHECK_THROWS_AS(characteristic_sweep(BoxSpec{}, {}, {1.0}), Error);
}

TEST_CASE("property: objective trace is non-increasing") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> mu(-5.0, 5.0);
  std::uniform_real_distribution<double> logs(std::log(0.05), std::log(4.0));
  for (int type = 0; type < 4; ++type) {
    for (int i = 0; i < 200; ++i) {
      const ScalarProblem p{mu(rng), std::exp(logs(rng)), random_prior(rng, type)};
      const auto r = scalar_map_solve(p, p.mu, 1e-9, 2000);
      for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
        REQUIRE(r.objective_trace[t] <= r.objective_trace[t - 1] + 1e-10);
    }
  }
}

TEST_CASE("property: agreement with the grid oracle") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> mu(-5.0, 5.0);
  std::uniform_real_distribution<double> logs(std::log(0.05), std::log(4.0));
  int checked = 0;
  for (int type = 0; type < 4; ++type) {
    for (int i = 0; i < 200; ++i) {
      const ScalarProblem p{mu(rng), std::exp(logs(rng)), random_prior(rng, type)};
      const auto r = scalar_map_solve(p, p.mu, 1e-12, 200000);
      const double ref = oracle(p);
      INFO("type " << type << " mu " << p.mu << " s2 " << p.s_sq << " gamma " << gamma_of(p.prior));
      REQUIRE(std::abs(r.x_hat - ref) <= std::max(10 * kStep, 1e-6 * (1.0 + std::abs(r.x_hat))));
      ++checked;
    }
  }
  CHECK(checked == 800);
}

TEST_CASE("property: feasibility iff the threshold is met") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pos(-3.0, 3.0);
  std::uniform_real_distribution<double> width(0.2, 4.0);
  std::uniform_real_distribution<double> gap(0.05, 3.0);
  std::uniform_real_distribution<double> loggamma(std::log(0.5), std::log(50.0));
  std::bernoulli_distribution coin;
  for (int i = 0; i < 100; ++i) {
    const double a = pos(rng);
    const double gamma = std::exp(loggamma(rng));
    std::vector<ConstraintPrior> priors{BoxSpec{a, a + width(rng), gamma}, HalfSpaceSpec{a, Side::RightOf, gamma},
                                        HalfSpaceSpec{a, Side::LeftOf, gamma}};
    for (const auto& prior : priors) {
      double mu = 0.0;
      if (const auto* b = std::get_if<BoxSpec>(&prior))
        mu = coin(rng) ? b->b + gap(rng) : b->a - gap(rng);
      else
        mu = std::get<HalfSpaceSpec>(prior).side == Side::RightOf ? a - gap(rng) : a + gap(rng);
      const double th = feasibility_threshold(mu, prior);
      REQUIRE(th > 0.0);
      const auto inside = scalar_map_solve({mu, 1.05 * th, prior}, mu, 1e-9, 5000);
      REQUIRE(inside.converged);
      REQUIRE(violation(inside.x_hat, prior) <= 1e-6);
      const auto outside = scalar_map_solve({mu, 0.95 * th, prior}, mu, 1e-9, 5000);
      REQUIRE(outside.converged);
      REQUIRE(violation(outside.x_hat, prior) > 1e-4 * th);
    }
  }
}

TEST_CASE("property: feasible start is a fixed point") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const BoxSpec box{-1.0 - u(rng), 1.0 + u(rng), 0.5 + 10 * u(rng)};
    const double mu = box.a + (box.b - box.a) * u(rng);
    const auto r = scalar_map_solve({mu, 0.1 + u(rng), box}, mu);
    REQUIRE(r.converged);
    REQUIRE(r.iterations <= 2);
    REQUIRE(r.x_hat == doctest::Approx(mu).epsilon(1e-12));
  }
}
