#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nuv/polyhedron.hpp"
#include "nuv/priors.hpp"
#include "nuv/ssm.hpp"

namespace nuv {

using Json = nlohmann::ordered_json;

/// Which scalar (or vector) quantity of the chain a constraint block acts on.
enum class Signal {
  Input,          // u_k[channel]
  Output,         // y_k[channel]
  State,          // x_k[channel]
  Shift,          // shift input channel (binary offset of a shifted box)
  ShiftedOutput,  // y_k[channel] - S_k[shift]
  Row,            // row . x_k
  OutputVector,   // y_k restricted to `outputs` (polyhedron blocks)
};

enum class BlockKind { Gaussian, Laplace, Box, HalfSpace, Binary, Polyhedron };

using EntryLaw = std::variant<GaussianMsg, ConstraintPrior, PolyhedronSpec>;

struct BlockEntry {
  int k = 1;
  EntryLaw law;
};

struct ConstraintBlock {
  std::string name;
  BlockKind kind = BlockKind::Gaussian;
  Signal signal = Signal::Input;
  int channel = 0;
  int shift = 0;
  Eigen::VectorXd row;
  std::vector<int> outputs;
  std::vector<BlockEntry> entries;  // ordered by k
};

struct SolverSettings {
  int max_iter = 2000;
  double tol = 1e-8;            // stop when max |delta| over the NUV nodes <= tol
  double objective_tol = 1e-10;  // or when the objective falls by <= objective_tol * max(1, |J|); 0 disables
  double init_variance = 1.0;
  double gamma_ramp = 1.0;  // 1 = constant gamma
  double gamma_max = 1e6;
  std::uint64_t seed = 1;
  double jitter = 1e-2;  // relative spread of the binary starting points
};

struct ChannelNames {
  std::vector<std::string> inputs;
  std::vector<std::string> states;
  std::vector<std::string> outputs;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  LinearSSM model;
  int shift_base = 0;  // index of the first shift input; model.m() when there are none
  int shifts = 0;
  ChannelNames names;
  std::vector<ConstraintBlock> blocks;
  SolverSettings solver;
  std::vector<std::string> warnings;

  const ConstraintBlock* block(const std::string& name) const;
  bool has_binary() const;
};

/// Parses a config tree. Unknown keys, wrong types, out-of-range indices and
/// missing channels raise ConfigError naming the offending key path; inverted
/// boxes raise InfeasibleConfig.
ScenarioConfig parse_scenario(const Json& tree);

/// Parses JSON text, reporting syntax errors with line and column.
Json parse_json_text(const std::string& text, const std::string& origin = "config");

/// Applies `dotted.path=value` assignments. The value is read as JSON when it
/// parses and as a string otherwise.
void apply_override(Json& tree, const std::string& assignment);

/// Names and config trees of the shipped scenarios, in a fixed order.
std::vector<std::string> builtin_scenario_names();
Json builtin_scenario_tree(const std::string& name);  // ConfigError for unknown names
std::vector<ScenarioConfig> builtin_scenarios();

struct BlockViolation {
  std::string name;
  BlockKind kind = BlockKind::Box;
  double max_violation = 0.0;
  int worst_k = 0;
  bool feasible = true;
  int nodes = 0;
  /// Nodes whose local likelihood (posterior divided by the prior message)
  /// meets the feasibility threshold.
  int threshold_met = 0;
  /// Nodes where that division is numerically meaningless.
  int threshold_unknown = 0;
  /// Threshold-meeting nodes that are nonetheless infeasible.
  int threshold_infeasible = 0;
};

struct ViolationReport {
  std::vector<BlockViolation> blocks;      // every non-Gaussian block
  std::vector<BlockViolation> violations;  // the infeasible subset
  double tolerance = 1e-5;
};

/// Per-block maximum violation of the posterior means, feasible at `tol`.
ViolationReport constraint_report(const Posterior& posterior, const ScenarioConfig& cfg, double tol = 1e-5);

struct ScenarioResult {
  std::string name;
  bool converged = false;
  int iterations = 0;
  std::string stop_reason;  // "step", "objective" or "max_iter"
  /// Exact objective (fixed Gaussian terms + initial state term + prior costs)
  /// after every smoothing pass. Empty when the config has binary blocks.
  std::vector<double> objective_trace;
  std::vector<double> change_trace;  // max |delta| over the constrained nodes
  Posterior posterior;
  ViolationReport report;
  std::optional<double> squared_error;  // sum over Gaussian output blocks
};

/// Alternates one smoothing pass with the closed-form update of every NUV node.
/// Throws only for invalid configs; non-convergence is reported in the result.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Exact objective at the chain estimate held in `posterior`.
double scenario_objective(const ScenarioConfig& cfg, const Posterior& posterior);

/// Trace table with columns k,channel,kind,mean,variance,lower,upper,violation.
std::string trace_csv(const ScenarioConfig& cfg, const ScenarioResult& result);
Json summary_json(const ScenarioConfig& cfg, const ScenarioResult& result);

std::string to_string(BlockKind kind);

}  // namespace nuv
