#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nuv/error.hpp"
#include "nuv/polyhedron.hpp"

using namespace nuv;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

bool inside_direct(const VectorXd& y, const PolyhedronSpec& p, double tol) {
  for (std::size_t l = 0; l < p.faces(); ++l) {
    const double s = p.normals[l].dot(y) - p.offsets[l];
    if (p.sides[l] == Side::RightOf ? s < -tol : s > tol) return false;
  }
  return true;
}

PolyhedronSpec random_polyhedron(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> nf(1, 6);
  PolyhedronSpec p;
  p.gamma = std::exp(g(rng));
  const int L = nf(rng);
  for (int l = 0; l < L; ++l) {
    Vector2d n(g(rng), g(rng));
    p.normals.push_back(n.normalized());
    p.offsets.push_back(g(rng));
    p.sides.push_back(l % 2 ? Side::LeftOf : Side::RightOf);
  }
  return p;
}

}  // namespace

TEST_CASE("triangle costs") {
  const PolyhedronSpec t = triangle_polyhedron();
  CHECK(polyhedron_cost(Vector2d(0.0, 5.0), t) <= 1e-12);
  CHECK(polyhedron_cost(Vector2d(0.0, 0.0), t) == doctest::Approx(2 * std::sqrt(13.0) + 2 * std::sqrt(5.0)));
  CHECK(polyhedron_cost(Vector2d(0.0, 0.0), t) == doctest::Approx(11.6833).epsilon(1e-4));
  for (const Vector2d y : {Vector2d(0, 0), Vector2d(3, 8), Vector2d(-4, 1)})
    CHECK(polyhedron_cost(y, triangle_polyhedron(2.0)) == doctest::Approx(2 * polyhedron_cost(y, t)));
}

TEST_CASE("triangle vertices lie on the boundary") {
  const PolyhedronSpec t = triangle_polyhedron();
  for (const Vector2d v : {Vector2d(11.0 / 7, 23.0 / 7), Vector2d(-1, 5), Vector2d(5, 5)}) {
    CHECK(polyhedron_cost(v, t) <= 1e-12);
    CHECK(polyhedron_violation(v, t) <= 1e-12);
  }
  CHECK(polyhedron_cost(Vector2d(2, 5.1), t) == doctest::Approx(0.2));
}

TEST_CASE("polyhedron_update") {
  const PolyhedronSpec t = triangle_polyhedron();
  SUBCASE("deep inside: no pull") {
    const Vector2d y(1.5, 4.5);
    const auto msgs = polyhedron_update(y, t);
    REQUIRE(msgs.size() == 3);
    for (std::size_t l = 0; l < 3; ++l) CHECK(msgs[l].mean == doctest::Approx(t.normals[l].dot(y)));
  }
  SUBCASE("one violated face is reflected") {
    const Vector2d y(2.0, 6.0);
    const auto msgs = polyhedron_update(y, t);
    CHECK(msgs[2].mean == doctest::Approx(4.0));
    CHECK(msgs[2].variance == doctest::Approx(1.0));
    CHECK(msgs[0].mean == doctest::Approx(t.normals[0].dot(y)));
    CHECK(msgs[1].mean == doctest::Approx(t.normals[1].dot(y)));
  }
  SUBCASE("unit square: only x <= 1 active") {
    const PolyhedronSpec sq = rectangle_polyhedron(0, 1, 0, 1);
    const Vector2d y(2.0, 0.5);
    const auto msgs = polyhedron_update(y, sq);
    CHECK(msgs[0].mean == doctest::Approx(2.0));
    CHECK(msgs[1].mean == doctest::Approx(0.0));
    CHECK(msgs[2].mean == doctest::Approx(0.5));
    CHECK(msgs[3].mean == doctest::Approx(0.5));
    CHECK(polyhedron_violation(y, sq) == doctest::Approx(1.0));
  }
}

TEST_CASE("errors") {
  const PolyhedronSpec t = triangle_polyhedron();
  CHECK_THROWS_AS(polyhedron_cost(VectorXd::Zero(3), t), Error);
  try {
    polyhedron_update(VectorXd::Zero(1), t);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  PolyhedronSpec bad = t;
  bad.normals[0] *= 2.0;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = t;
  bad.offsets.pop_back();
  CHECK_THROWS_AS(validate(bad), Error);
  bad = t;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(validate(bad), Error);
  CHECK_THROWS_AS(rectangle_polyhedron(1, 0, 0, 1), Error);
}

TEST_CASE("normalized rescales and warns") {
  PolyhedronSpec p = triangle_polyhedron();
  p.normals[1] *= 3.0;
  p.offsets[1] *= 3.0;
  std::vector<std::string> warnings;
  const PolyhedronSpec q = normalized(p, &warnings);
  CHECK(warnings.size() == 1);
  CHECK_NOTHROW(validate(q));
  CHECK(q.offsets[1] == doctest::Approx(std::sqrt(5.0)));
  warnings.clear();
  normalized(triangle_polyhedron(), &warnings);
  CHECK(warnings.empty());
}

TEST_CASE("zero cost iff inside, on random points") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const PolyhedronSpec p = random_polyhedron(rng);
    for (int i = 0; i < 50; ++i) {
      const Vector2d y(2 * g(rng), 2 * g(rng));
      const double c = polyhedron_cost(y, p);
      if (inside_direct(y, p, 0.0)) {
        CHECK(c <= 1e-9);
      } else if (!inside_direct(y, p, 1e-9)) {
        CHECK(c > 1e-9);
      }
      CHECK((polyhedron_violation(y, p) > 0.0) == !inside_direct(y, p, 0.0));
    }
  }
}

TEST_CASE("convexity on random pairs") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ul(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const PolyhedronSpec p = random_polyhedron(rng);
    const Vector2d u(3 * g(rng), 3 * g(rng)), v(3 * g(rng), 3 * g(rng));
    const double lam = ul(rng);
    const double lhs = polyhedron_cost(lam * u + (1 - lam) * v, p);
    const double rhs = lam * polyhedron_cost(u, p) + (1 - lam) * polyhedron_cost(v, p);
    CHECK(lhs <= rhs + 1e-9);
  }
}
