#pragma once

#include <variant>

#include "nuv/gaussian.hpp"

namespace nuv {

/// Laplace prior exp(-gamma |x - a|) as a NUV with one unknown variance.
struct LaplaceSpec {
  double a = 0.0;
  double gamma = 1.0;
};

/// Interval constraint a <= x <= b with slope gamma outside.
struct BoxSpec {
  double a = -1.0;
  double b = 1.0;
  double gamma = 1.0;
};

enum class Side { RightOf, LeftOf };  // x >= a, x <= a

struct HalfSpaceSpec {
  double a = 0.0;
  Side side = Side::RightOf;
  double gamma = 1.0;
};

/// Two-level prior {a, b}. Not a constraint in the cost sense: it has no
/// closed-form cost and is only used through its messages.
struct BinarySpec {
  double a = 0.0;
  double b = 1.0;
};

using ConstraintPrior = std::variant<LaplaceSpec, BoxSpec, HalfSpaceSpec, BinarySpec>;

/// Unknown-variance state theta. Single-variance priors leave sigma_b_sq at 0.
struct NuvState {
  double sigma_a_sq = 0.0;
  double sigma_b_sq = 0.0;
};

/// Throws InvalidProblem for gamma <= 0 or non-finite parameters and
/// InfeasibleConfig for an inverted box or binary pair.
void validate(const ConstraintPrior& prior);

double gamma_of(const ConstraintPrior& prior);  // 0 for Binary
ConstraintPrior with_gamma(const ConstraintPrior& prior, double gamma);

/// log rho(sigma) = log sqrt(2 pi sigma^2) - gamma^2 sigma^2 / 2
double log_rho(double sigma_sq, double gamma);

/// log psi(gamma, a, b) = gamma |b - a|
double log_psi(const BoxSpec& spec);

NuvState laplace_update(double x_hat, const LaplaceSpec& spec);
GaussianMsg laplace_message(const NuvState& state, const LaplaceSpec& spec);

NuvState box_update(double x_hat, const BoxSpec& spec);
GaussianMsg box_message(const NuvState& state, const BoxSpec& spec);

/// log g(theta) with psi included, evaluated on the floored state. Uses the
/// rearrangement
///   log g = 1/2 log(2 pi sa sb / (sa + sb)) - (|b-a| - gamma (sa + sb))^2 / (2 (sa + sb))
/// which stays accurate for |b - a| up to ~1e8 and gamma up to ~1e4.
double box_log_g(const NuvState& state, const BoxSpec& spec);

/// Limit of the box message for b -> +inf (RightOf) or b -> -inf (LeftOf).
GaussianMsg halfspace_update(double x_hat, const HalfSpaceSpec& spec);

/// Alternating-maximization rule sigma_i^2 = (x_hat - level_i)^2.
NuvState binary_update(double x_hat, const BinarySpec& spec);
GaussianMsg binary_message(const NuvState& state, const BinarySpec& spec);

/// theta update followed by the emitted Gaussian message, for any prior.
GaussianMsg prior_message(double x_hat, const ConstraintPrior& prior);

/// Closed-form cost kappa(x) = -log p(x). Throws NotApplicable for Binary.
double cost(double x, const ConstraintPrior& prior);

/// Distance from x to the feasible set (0 inside). Laplace is unconstrained and
/// Binary measures the distance to the nearer level.
double violation(double x, const ConstraintPrior& prior);

bool has_cost(const ConstraintPrior& prior);

}  // namespace nuv
