#pragma once

#include <vector>

#include "nuv/priors.hpp"

namespace nuv {

/// One Gaussian likelihood N(x; mu, s_sq) against one constraint prior.
struct ScalarProblem {
  double mu = 0.0;
  double s_sq = 1.0;
  ConstraintPrior prior = BoxSpec{};
};

struct SolveReport {
  double x_hat = 0.0;
  int iterations = 0;
  /// (x - mu)^2 / (2 s^2) + kappa(x) at the initial point and after every
  /// iteration. Empty for priors without a closed-form cost.
  std::vector<double> objective_trace;
  bool converged = false;
};

struct ScalarSolveOptions {
  double tol = 1e-9;
  int max_iter = 500;
};

/// Exact objective (x - mu)^2 / (2 s^2) + kappa(x).
double scalar_objective(const ScalarProblem& p, double x);

/// Alternates the closed-form theta update with the Gaussian x step until
/// |delta x| < tol or max_iter iterations.
SolveReport scalar_map_solve(const ScalarProblem& p, double x_init, double tol = 1e-9, int max_iter = 500);
inline SolveReport scalar_map_solve(const ScalarProblem& p) { return scalar_map_solve(p, p.mu); }

/// Smallest s^2 for which the MAP estimate is feasible. NotApplicable for
/// Laplace and Binary priors.
double feasibility_threshold(double mu, const ConstraintPrior& prior);

/// Grid argmin of the exact objective on lo, lo + step, ... <= hi. Ties go to
/// the smallest x.
double brute_force_map(const ScalarProblem& p, double lo, double hi, double step);

struct SweepRow {
  double mu = 0.0;
  double s_sq = 0.0;
  double x_hat = 0.0;
  double oracle_x_hat = 0.0;
  bool feasible = false;
  bool converged = false;
  int iterations = 0;
};

struct SweepOptions {
  double tol = 1e-9;
  int max_iter = 5000;
  double oracle_step = 1e-4;  // <= 0 skips the brute-force column (it then repeats x_hat)
  double oracle_margin = 1.0;  // grid extends this far beyond mu and the bounds
};

/// x_hat(mu) for every s^2 in s_sq_list, rows ordered by s^2 then mu.
std::vector<SweepRow> characteristic_sweep(const ConstraintPrior& prior, const std::vector<double>& mu_grid,
                                           const std::vector<double>& s_sq_list, const SweepOptions& options = {});

}  // namespace nuv
