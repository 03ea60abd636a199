#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nuv/gaussian.hpp"
#include "nuv/priors.hpp"

namespace nuv {

/// Intersection of L half-spaces on a vector y. Face l requires
/// normals[l] . y >= offsets[l] (RightOf) or <= offsets[l] (LeftOf).
struct PolyhedronSpec {
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> offsets;
  std::vector<Side> sides;
  double gamma = 1.0;

  std::size_t faces() const { return normals.size(); }
  Eigen::Index dim() const { return normals.empty() ? 0 : normals.front().size(); }
  /// Scalar prior on the projection of face l.
  HalfSpaceSpec face(std::size_t l) const;
};

/// Throws InvalidProblem for empty specs, mismatched lengths, gamma <= 0 or
/// normals whose length differs from 1 by more than 1e-9, and
/// DimensionMismatch if the normals disagree in size.
void validate(const PolyhedronSpec& spec);

/// Rescales every (normal, offset) pair to a unit normal. Faces whose norm was
/// off by more than 1e-6 are reported in `warnings` when it is non-null.
PolyhedronSpec normalized(const PolyhedronSpec& spec, std::vector<std::string>* warnings = nullptr);

/// Sum of the half-space costs of the projections normals[l] . y.
double polyhedron_cost(const Eigen::VectorXd& y, const PolyhedronSpec& spec);

/// One half-space message per face, on the scalar projection of y_hat.
std::vector<GaussianMsg> polyhedron_update(const Eigen::VectorXd& y_hat, const PolyhedronSpec& spec);

/// Largest face violation, (a - n.y)+ for RightOf and (n.y - a)+ for LeftOf.
double polyhedron_violation(const Eigen::VectorXd& y, const PolyhedronSpec& spec);

/// Triangle with vertices (11/7, 23/7), (-1, 5) and (5, 5), bounded by
///   (2, 3)/sqrt(13) . y >= sqrt(13),  (-1, 2)/sqrt(5) . y >= sqrt(5),  y_2 <= 5.
PolyhedronSpec triangle_polyhedron(double gamma = 1.0);

/// Axis-aligned rectangle [lo_1, hi_1] x [lo_2, hi_2] as four faces.
PolyhedronSpec rectangle_polyhedron(double lo1, double hi1, double lo2, double hi2, double gamma = 1.0);

}  // namespace nuv
