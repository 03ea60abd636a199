#include "nuv/scalar_lab.hpp"

#include <algorithm>
#include <cmath>

#include "nuv/error.hpp"

namespace nuv {
namespace {

void check_problem(const ScalarProblem& p) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.s_sq) || !(p.s_sq > 0.0))
    throw Error(ErrorKind::InvalidProblem, "likelihood needs finite mu and s_sq > 0");
  validate(p.prior);
}

std::pair<double, double> prior_extent(const ConstraintPrior& prior) {
  if (const auto* s = std::get_if<BoxSpec>(&prior)) return {s->a, s->b};
  if (const auto* s = std::get_if<BinarySpec>(&prior)) return {s->a, s->b};
  if (const auto* s = std::get_if<HalfSpaceSpec>(&prior)) return {s->a, s->a};
  const auto& s = std::get<LaplaceSpec>(prior);
  return {s.a, s.a};
}

}  // namespace

double scalar_objective(const ScalarProblem& p, double x) {
  const double d = x - p.mu;
  return d * d / (2.0 * p.s_sq) + cost(x, p.prior);
}

SolveReport scalar_map_solve(const ScalarProblem& p, double x_init, double tol, int max_iter) {
  check_problem(p);
  if (!std::isfinite(x_init)) throw Error(ErrorKind::InvalidProblem, "x_init must be finite");
  if (!(tol > 0.0) || max_iter < 1) throw Error(ErrorKind::InvalidProblem, "need tol > 0 and max_iter >= 1");

  const bool traced = has_cost(p.prior);
  const GaussianMsg likelihood{p.mu, p.s_sq};

  SolveReport report;
  double x = x_init;
  if (traced) report.objective_trace.push_back(scalar_objective(p, x));
  for (int it = 1; it <= max_iter; ++it) {
    const double next = multiply(likelihood, prior_message(x, p.prior)).mean;
    report.iterations = it;
    if (traced) report.objective_trace.push_back(scalar_objective(p, next));
    const double step = std::abs(next - x);
    x = next;
    if (step < tol) {
      report.converged = true;
      break;
    }
  }
  report.x_hat = x;
  return report;
}

double feasibility_threshold(double mu, const ConstraintPrior& prior) {
  if (const auto* s = std::get_if<BoxSpec>(&prior)) {
    if (mu >= s->a && mu <= s->b) return 0.0;
    return std::min(std::abs(s->a - mu), std::abs(s->b - mu)) / (2.0 * s->gamma);
  }
  if (const auto* s = std::get_if<HalfSpaceSpec>(&prior)) {
    const bool inside = s->side == Side::RightOf ? mu >= s->a : mu <= s->a;
    return inside ? 0.0 : std::abs(s->a - mu) / (2.0 * s->gamma);
  }
  throw Error(ErrorKind::NotApplicable, "feasibility threshold exists only for box and half-space priors");
}

double brute_force_map(const ScalarProblem& p, double lo, double hi, double step) {
  if (!(lo < hi) || !(step > 0.0)) throw Error(ErrorKind::InvalidProblem, "need lo < hi and step > 0");
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  double best_x = lo;
  double best = scalar_objective(p, lo);
  for (long long i = 1; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const double f = scalar_objective(p, x);
    if (f < best) {
      best = f;
      best_x = x;
    }
  }
  return best_x;
}

std::vector<SweepRow> characteristic_sweep(const ConstraintPrior& prior, const std::vector<double>& mu_grid,
                                           const std::vector<double>& s_sq_list, const SweepOptions& options) {
  if (mu_grid.empty() || s_sq_list.empty()) throw Error(ErrorKind::InvalidProblem, "sweep grids must be non-empty");
  validate(prior);
  const auto [lo_bound, hi_bound] = prior_extent(prior);
  const bool oracle = has_cost(prior) && options.oracle_step > 0.0;

  std::vector<SweepRow> rows;
  rows.reserve(mu_grid.size() * s_sq_list.size());
  for (double s_sq : s_sq_list) {
    for (double mu : mu_grid) {
      const ScalarProblem p{mu, s_sq, prior};
      const SolveReport r = scalar_map_solve(p, mu, options.tol, options.max_iter);
      SweepRow row;
      row.mu = mu;
      row.s_sq = s_sq;
      row.x_hat = r.x_hat;
      row.converged = r.converged;
      row.iterations = r.iterations;
      row.oracle_x_hat = oracle ? brute_force_map(p, std::min(mu, lo_bound) - options.oracle_margin,
                                                  std::max(mu, hi_bound) + options.oracle_margin, options.oracle_step)
                                : r.x_hat;
      row.feasible = violation(r.x_hat, prior) <= 1e-6;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace nuv
