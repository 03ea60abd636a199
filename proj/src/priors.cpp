#include "nuv/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nuv/error.hpp"

namespace nuv {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorKind::InvalidProblem, "gamma must be positive and finite");
}

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidProblem, std::string(name) + " must be finite");
}

}  // namespace

void validate(const ConstraintPrior& prior) {
  std::visit(overloaded{
                 [](const LaplaceSpec& s) {
                   check_finite(s.a, "a");
                   check_gamma(s.gamma);
                 },
                 [](const BoxSpec& s) {
                   check_finite(s.a, "a");
                   check_finite(s.b, "b");
                   check_gamma(s.gamma);
                   if (s.a > s.b) throw Error(ErrorKind::InfeasibleConfig, "box lower bound exceeds upper bound");
                 },
                 [](const HalfSpaceSpec& s) {
                   check_finite(s.a, "a");
                   check_gamma(s.gamma);
                 },
                 [](const BinarySpec& s) {
                   check_finite(s.a, "a");
                   check_finite(s.b, "b");
                   if (!(s.a < s.b)) throw Error(ErrorKind::InfeasibleConfig, "binary levels must satisfy a < b");
                 },
             },
             prior);
}

double gamma_of(const ConstraintPrior& prior) {
  return std::visit(overloaded{
                        [](const BinarySpec&) { return 0.0; },
                        [](const auto& s) { return s.gamma; },
                    },
                    prior);
}

ConstraintPrior with_gamma(const ConstraintPrior& prior, double gamma) {
  return std::visit(overloaded{
                        [](const BinarySpec& s) -> ConstraintPrior { return s; },
                        [gamma](auto s) -> ConstraintPrior {
                          s.gamma = gamma;
                          return s;
                        },
                    },
                    prior);
}

double log_rho(double sigma_sq, double gamma) {
  return 0.5 * std::log(2.0 * std::numbers::pi * sigma_sq) - 0.5 * gamma * gamma * sigma_sq;
}

double log_psi(const BoxSpec& spec) { return spec.gamma * std::abs(spec.b - spec.a); }

NuvState laplace_update(double x_hat, const LaplaceSpec& spec) { return {std::abs(x_hat - spec.a) / spec.gamma, 0.0}; }

GaussianMsg laplace_message(const NuvState& state, const LaplaceSpec& spec) {
  return {spec.a, floor_variance(state.sigma_a_sq)};
}

NuvState box_update(double x_hat, const BoxSpec& spec) {
  return {std::abs(x_hat - spec.a) / spec.gamma, std::abs(x_hat - spec.b) / spec.gamma};
}

GaussianMsg box_message(const NuvState& state, const BoxSpec& spec) {
  return multiply(GaussianMsg{spec.a, floor_variance(state.sigma_a_sq)},
                  GaussianMsg{spec.b, floor_variance(state.sigma_b_sq)});
}

double box_log_g(const NuvState& state, const BoxSpec& spec) {
  const double sa = floor_variance(state.sigma_a_sq);
  const double sb = floor_variance(state.sigma_b_sq);
  const double total = sa + sb;
  const double theta_var = sa * (sb / total);
  const double gap = std::abs(spec.b - spec.a) - spec.gamma * total;
  return 0.5 * std::log(2.0 * std::numbers::pi * theta_var) - gap * gap / (2.0 * total);
}

GaussianMsg halfspace_update(double x_hat, const HalfSpaceSpec& spec) {
  const double d = std::abs(x_hat - spec.a);
  const double mean = spec.side == Side::RightOf ? spec.a + d : spec.a - d;
  return {mean, floor_variance(d / spec.gamma)};
}

NuvState binary_update(double x_hat, const BinarySpec& spec) {
  const double da = x_hat - spec.a;
  const double db = x_hat - spec.b;
  return {da * da, db * db};
}

GaussianMsg binary_message(const NuvState& state, const BinarySpec& spec) {
  return multiply(GaussianMsg{spec.a, floor_variance(state.sigma_a_sq)},
                  GaussianMsg{spec.b, floor_variance(state.sigma_b_sq)});
}

GaussianMsg prior_message(double x_hat, const ConstraintPrior& prior) {
  return std::visit(overloaded{
                        [x_hat](const LaplaceSpec& s) { return laplace_message(laplace_update(x_hat, s), s); },
                        [x_hat](const BoxSpec& s) { return box_message(box_update(x_hat, s), s); },
                        [x_hat](const HalfSpaceSpec& s) { return halfspace_update(x_hat, s); },
                        [x_hat](const BinarySpec& s) { return binary_message(binary_update(x_hat, s), s); },
                    },
                    prior);
}

double cost(double x, const ConstraintPrior& prior) {
  return std::visit(overloaded{
                        [x](const LaplaceSpec& s) { return s.gamma * std::abs(x - s.a); },
                        [x](const BoxSpec& s) {
                          return s.gamma * (std::abs(x - s.a) + std::abs(x - s.b) - std::abs(s.b - s.a));
                        },
                        [x](const HalfSpaceSpec& s) {
                          const double d = x - s.a;
                          return s.side == Side::RightOf ? s.gamma * (std::abs(d) - d) : s.gamma * (std::abs(d) + d);
                        },
                        [](const BinarySpec&) -> double {
                          throw Error(ErrorKind::NotApplicable, "binary prior has no closed-form cost");
                        },
                    },
                    prior);
}

double violation(double x, const ConstraintPrior& prior) {
  return std::visit(overloaded{
                        [](const LaplaceSpec&) { return 0.0; },
                        [x](const BoxSpec& s) { return std::max({0.0, s.a - x, x - s.b}); },
                        [x](const HalfSpaceSpec& s) {
                          return s.side == Side::RightOf ? std::max(0.0, s.a - x) : std::max(0.0, x - s.a);
                        },
                        [x](const BinarySpec& s) { return std::min(std::abs(x - s.a), std::abs(x - s.b)); },
                    },
                    prior);
}

bool has_cost(const ConstraintPrior& prior) { return !std::holds_alternative<BinarySpec>(prior); }

}  // namespace nuv
