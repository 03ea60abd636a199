#include "nuv/polyhedron.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nuv/error.hpp"

namespace nuv {

HalfSpaceSpec PolyhedronSpec::face(std::size_t l) const { return {offsets.at(l), sides.at(l), gamma}; }

namespace {

void check_shape(const PolyhedronSpec& spec) {
  if (spec.normals.empty()) throw Error(ErrorKind::InvalidProblem, "polyhedron has no faces");
  if (spec.offsets.size() != spec.normals.size() || spec.sides.size() != spec.normals.size())
    throw Error(ErrorKind::InvalidProblem, "polyhedron normals, offsets and sides differ in length");
  if (!(spec.gamma > 0.0) || !std::isfinite(spec.gamma))
    throw Error(ErrorKind::InvalidProblem, "polyhedron gamma must be positive");
  for (std::size_t l = 0; l < spec.faces(); ++l) {
    if (spec.normals[l].size() != spec.dim())
      throw Error(ErrorKind::DimensionMismatch, "polyhedron normals differ in dimension");
    if (!spec.normals[l].allFinite() || !std::isfinite(spec.offsets[l]))
      throw Error(ErrorKind::InvalidProblem, "polyhedron face has non-finite entries");
  }
}

void check_point(const Eigen::VectorXd& y, const PolyhedronSpec& spec) {
  validate(spec);
  if (y.size() != spec.dim()) {
    std::ostringstream os;
    os << "point of dimension " << y.size() << " against polyhedron of dimension " << spec.dim();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

}  // namespace

void validate(const PolyhedronSpec& spec) {
  check_shape(spec);
  for (std::size_t l = 0; l < spec.faces(); ++l)
    if (std::abs(spec.normals[l].norm() - 1.0) > 1e-9)
      throw Error(ErrorKind::InvalidProblem, "polyhedron normal " + std::to_string(l) + " is not unit length");
}

PolyhedronSpec normalized(const PolyhedronSpec& spec, std::vector<std::string>* warnings) {
  check_shape(spec);
  PolyhedronSpec out = spec;
  for (std::size_t l = 0; l < spec.faces(); ++l) {
    const double len = spec.normals[l].norm();
    if (!(len > 0.0)) throw Error(ErrorKind::InvalidProblem, "polyhedron normal " + std::to_string(l) + " is zero");
    if (warnings && std::abs(len - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "polyhedron normal " << l << " has length " << len << "; rescaled to unit length";
      warnings->push_back(os.str());
    }
    out.normals[l] = spec.normals[l] / len;
    out.offsets[l] = spec.offsets[l] / len;
  }
  return out;
}

double polyhedron_cost(const Eigen::VectorXd& y, const PolyhedronSpec& spec) {
  check_point(y, spec);
  double total = 0.0;
  for (std::size_t l = 0; l < spec.faces(); ++l) total += cost(spec.normals[l].dot(y), spec.face(l));
  return total;
}

std::vector<GaussianMsg> polyhedron_update(const Eigen::VectorXd& y_hat, const PolyhedronSpec& spec) {
  check_point(y_hat, spec);
  std::vector<GaussianMsg> out;
  out.reserve(spec.faces());
  for (std::size_t l = 0; l < spec.faces(); ++l)
    out.push_back(halfspace_update(spec.normals[l].dot(y_hat), spec.face(l)));
  return out;
}

double polyhedron_violation(const Eigen::VectorXd& y, const PolyhedronSpec& spec) {
  check_point(y, spec);
  double worst = 0.0;
  for (std::size_t l = 0; l < spec.faces(); ++l) worst = std::max(worst, violation(spec.normals[l].dot(y), spec.face(l)));
  return worst;
}

PolyhedronSpec triangle_polyhedron(double gamma) {
  PolyhedronSpec t;
  t.normals = {Eigen::Vector2d(2.0, 3.0) / std::sqrt(13.0), Eigen::Vector2d(-1.0, 2.0) / std::sqrt(5.0),
               Eigen::Vector2d(0.0, 1.0)};
  t.offsets = {std::sqrt(13.0), std::sqrt(5.0), 5.0};
  t.sides = {Side::RightOf, Side::RightOf, Side::LeftOf};
  t.gamma = gamma;
  return t;
}

PolyhedronSpec rectangle_polyhedron(double lo1, double hi1, double lo2, double hi2, double gamma) {
  if (lo1 > hi1 || lo2 > hi2) throw Error(ErrorKind::InfeasibleConfig, "rectangle with inverted bounds");
  PolyhedronSpec r;
  r.normals = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0),
               Eigen::Vector2d(0.0, 1.0)};
  r.offsets = {lo1, hi1, lo2, hi2};
  r.sides = {Side::RightOf, Side::LeftOf, Side::RightOf, Side::LeftOf};
  r.gamma = gamma;
  return r;
}

}  // namespace nuv
