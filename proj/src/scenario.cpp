#include "nuv/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "nuv/error.hpp"
#include "nuv/scalar_lab.hpp"

namespace nuv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Either an input channel or a linear functional of the state.
struct Target {
  bool input = false;
  int j = 0;
  Eigen::VectorXd row;
};

/// One scalar factor of the model. Polyhedron entries expand to one node per face.
struct ScalarNode {
  std::size_t block = 0;
  std::size_t entry = 0;
  int k = 1;
  Target target;
  std::variant<GaussianMsg, ConstraintPrior> law;
};

int base_states(const ScenarioConfig& cfg) { return static_cast<int>(cfg.model.n()) - cfg.shifts; }

Target resolve(const ScenarioConfig& cfg, const ConstraintBlock& b) {
  const LinearSSM& m = cfg.model;
  Target t;
  switch (b.signal) {
    case Signal::Input:
      t.input = true;
      t.j = b.channel;
      break;
    case Signal::Shift:
      t.input = true;
      t.j = cfg.shift_base + b.channel;
      break;
    case Signal::Output: t.row = m.C.row(b.channel).transpose(); break;
    case Signal::State: t.row = Eigen::VectorXd::Unit(m.n(), b.channel); break;
    case Signal::ShiftedOutput:
      t.row = m.C.row(b.channel).transpose() - Eigen::VectorXd::Unit(m.n(), base_states(cfg) + b.shift);
      break;
    case Signal::Row: t.row = b.row; break;
    case Signal::OutputVector: throw Error(ErrorKind::InvalidProblem, "vector signal has no scalar target");
  }
  return t;
}

std::vector<ScalarNode> layout(const ScenarioConfig& cfg) {
  std::vector<ScalarNode> nodes;
  for (std::size_t bi = 0; bi < cfg.blocks.size(); ++bi) {
    const ConstraintBlock& b = cfg.blocks[bi];
    if (b.kind == BlockKind::Polyhedron) {
      for (std::size_t ei = 0; ei < b.entries.size(); ++ei) {
        const PolyhedronSpec& poly = std::get<PolyhedronSpec>(b.entries[ei].law);
        for (std::size_t l = 0; l < poly.faces(); ++l) {
          Target t;
          t.row = Eigen::VectorXd::Zero(cfg.model.n());
          for (std::size_t i = 0; i < b.outputs.size(); ++i)
            t.row += poly.normals[l](static_cast<Eigen::Index>(i)) * cfg.model.C.row(b.outputs[i]).transpose();
          nodes.push_back({bi, ei, b.entries[ei].k, t, ConstraintPrior{poly.face(l)}});
        }
      }
      continue;
    }
    const Target t = resolve(cfg, b);
    for (std::size_t ei = 0; ei < b.entries.size(); ++ei) {
      const EntryLaw& law = b.entries[ei].law;
      if (const auto* g = std::get_if<GaussianMsg>(&law)) {
        nodes.push_back({bi, ei, b.entries[ei].k, t, *g});
      } else {
        nodes.push_back({bi, ei, b.entries[ei].k, t, std::get<ConstraintPrior>(law)});
      }
    }
  }
  return nodes;
}

double value_of(const Target& t, int k, const Posterior& post) {
  return t.input ? post.u(k, t.j) : t.row.dot(post.x_mean.at(k - 1));
}

GaussianMsg marginal_of(const Target& t, int k, const Posterior& post) {
  return t.input ? post.input_marginal(k, t.j) : post.functional_marginal(k, t.row);
}

void attach(FactorSet& f, const Target& t, int k, const GaussianMsg& msg) {
  if (t.input) {
    f.add_input(k, t.j, msg);
  } else {
    f.add_state_functional(k, t.row, msg);
  }
}

double node_violation(const ScalarNode& n, double v) {
  if (const auto* p = std::get_if<ConstraintPrior>(&n.law)) return violation(v, *p);
  return 0.0;
}

double node_cost(const ScalarNode& n, double v) {
  if (const auto* g = std::get_if<GaussianMsg>(&n.law)) return 0.5 * (v - g->mean) * (v - g->mean) / g->variance;
  const ConstraintPrior& p = std::get<ConstraintPrior>(n.law);
  return has_cost(p) ? cost(v, p) : kNaN;
}

GaussianMsg initial_message(const ConstraintPrior& prior, double v0, double unit) {
  return std::visit(
      [&](const auto& s) -> GaussianMsg {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LaplaceSpec>) {
          return {s.a, v0};
        } else if constexpr (std::is_same_v<T, BoxSpec>) {
          return box_message(box_update(0.5 * (s.a + s.b), s), s);
        } else if constexpr (std::is_same_v<T, HalfSpaceSpec>) {
          return {s.a, v0};
        } else {
          const double x = 0.5 * (s.a + s.b) + unit * (s.b - s.a);
          return binary_message(binary_update(x, s), s);
        }
      },
      prior);
}

ConstraintPrior ramped(const ConstraintPrior& prior, double factor, double gamma_max) {
  if (!std::holds_alternative<BoxSpec>(prior) && !std::holds_alternative<HalfSpaceSpec>(prior)) return prior;
  return with_gamma(prior, std::min(gamma_of(prior) * factor, std::max(gamma_max, gamma_of(prior))));
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return "";
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

/// Interval implied by one prior, infinite where unbounded.
std::pair<double, double> bounds_of(const ConstraintPrior& p) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (const auto* b = std::get_if<BoxSpec>(&p)) return {b->a, b->b};
  if (const auto* h = std::get_if<HalfSpaceSpec>(&p))
    return h->side == Side::RightOf ? std::pair{h->a, inf} : std::pair{-inf, h->a};
  if (const auto* b = std::get_if<BinarySpec>(&p)) return {b->a, b->b};
  return {-inf, inf};
}

}  // namespace

std::string to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Gaussian: return "gaussian";
    case BlockKind::Laplace: return "laplace";
    case BlockKind::Box: return "box";
    case BlockKind::HalfSpace: return "halfspace";
    case BlockKind::Binary: return "binary";
    case BlockKind::Polyhedron: return "polyhedron";
  }
  return "unknown";
}

double scenario_objective(const ScenarioConfig& cfg, const Posterior& post) {
  const Eigen::VectorXd d = post.x0_mean - cfg.model.x0.mean;
  double total = 0.5 * d.dot(cfg.model.x0.precision() * d);
  for (const ScalarNode& n : layout(cfg)) {
    if (const auto* p = std::get_if<ConstraintPrior>(&n.law); p && !has_cost(*p)) continue;
    total += node_cost(n, value_of(n.target, n.k, post));
  }
  return total;
}

ViolationReport constraint_report(const Posterior& post, const ScenarioConfig& cfg, double tol) {
  ViolationReport rep;
  rep.tolerance = tol;
  std::vector<BlockViolation> per_block(cfg.blocks.size());
  std::vector<std::vector<double>> entry_viol(cfg.blocks.size());
  for (std::size_t bi = 0; bi < cfg.blocks.size(); ++bi) {
    per_block[bi].name = cfg.blocks[bi].name;
    per_block[bi].kind = cfg.blocks[bi].kind;
    entry_viol[bi].assign(cfg.blocks[bi].entries.size(), 0.0);
  }
  for (const ScalarNode& n : layout(cfg)) {
    const auto* prior = std::get_if<ConstraintPrior>(&n.law);
    if (!prior) continue;
    const double v = value_of(n.target, n.k, post);
    const double viol = node_violation(n, v);
    BlockViolation& bv = per_block[n.block];
    ++bv.nodes;
    entry_viol[n.block][n.entry] = std::max(entry_viol[n.block][n.entry], viol);
    if (!std::holds_alternative<BoxSpec>(*prior) && !std::holds_alternative<HalfSpaceSpec>(*prior)) continue;
    const GaussianMsg marg = marginal_of(n.target, n.k, post);
    const GaussianMsg msg = prior_message(v, *prior);
    const double pm = marg.precision(), pp = msg.precision();
    if (!(pm - pp > 1e-6 * pm)) {
      ++bv.threshold_unknown;
      continue;
    }
    const double ext_var = 1.0 / (pm - pp);
    const double ext_mean = (marg.weighted_mean() - msg.weighted_mean()) * ext_var;
    if (ext_var >= feasibility_threshold(ext_mean, *prior)) {
      ++bv.threshold_met;
      if (viol > tol) ++bv.threshold_infeasible;
    }
  }
  for (std::size_t bi = 0; bi < cfg.blocks.size(); ++bi) {
    const ConstraintBlock& b = cfg.blocks[bi];
    if (b.kind == BlockKind::Gaussian) continue;
    BlockViolation& bv = per_block[bi];
    for (std::size_t ei = 0; ei < b.entries.size(); ++ei) {
      if (entry_viol[bi][ei] > bv.max_violation) {
        bv.max_violation = entry_viol[bi][ei];
        bv.worst_k = b.entries[ei].k;
      }
    }
    bv.feasible = bv.max_violation <= tol;
    rep.blocks.push_back(bv);
    if (!bv.feasible) rep.violations.push_back(bv);
  }
  return rep;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.model.validate();
  const std::vector<ScalarNode> nodes = layout(cfg);
  const SolverSettings& s = cfg.solver;

  FactorSet base(cfg.model);
  struct Active {
    const ScalarNode* node;
    ConstraintPrior prior;
    GaussianMsg msg;
    double last = kNaN;
  };
  std::vector<Active> active;
  std::mt19937_64 rng(s.seed);
  for (const ScalarNode& n : nodes) {
    if (const auto* g = std::get_if<GaussianMsg>(&n.law)) {
      attach(base, n.target, n.k, *g);
      continue;
    }
    const ConstraintPrior& prior = std::get<ConstraintPrior>(n.law);
    double unit = 0.0;
    if (std::holds_alternative<BinarySpec>(prior)) {
      const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      unit = s.jitter * (2.0 * u01 - 1.0);
    }
    active.push_back({&n, prior, initial_message(prior, s.init_variance, unit)});
  }

  ScenarioResult res;
  res.name = cfg.name;
  const bool exact_objective = !cfg.has_binary();
  for (int it = 1; it <= s.max_iter; ++it) {
    FactorSet f = base;
    for (const Active& a : active) attach(f, a.node->target, a.node->k, a.msg);
    res.posterior = smooth(cfg.model, f);
    res.iterations = it;

    double change = it == 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (Active& a : active) {
      const double v = value_of(a.node->target, a.node->k, res.posterior);
      if (it > 1) change = std::max(change, std::abs(v - a.last));
      a.last = v;
    }
    if (active.empty()) change = 0.0;
    res.change_trace.push_back(change);
    if (exact_objective) res.objective_trace.push_back(scenario_objective(cfg, res.posterior));
    if (change <= s.tol) {
      res.converged = true;
      res.stop_reason = "step";
      break;
    }
    const std::size_t n_obj = res.objective_trace.size();
    if (s.objective_tol > 0.0 && n_obj >= 2) {
      const double cur = res.objective_trace[n_obj - 1];
      const double drop = res.objective_trace[n_obj - 2] - cur;
      if (drop >= 0.0 && drop <= s.objective_tol * std::max(1.0, std::abs(cur))) {
        res.converged = true;
        res.stop_reason = "objective";
        break;
      }
    }
    for (Active& a : active) {
      if (s.gamma_ramp > 1.0) a.prior = ramped(a.prior, s.gamma_ramp, s.gamma_max);
      a.msg = prior_message(a.last, a.prior);
    }
  }

  if (!res.converged) res.stop_reason = "max_iter";
  res.report = constraint_report(res.posterior, cfg);
  double sq = 0.0;
  bool any = false;
  for (const ScalarNode& n : nodes) {
    const ConstraintBlock& b = cfg.blocks[n.block];
    const auto* g = std::get_if<GaussianMsg>(&n.law);
    if (!g || b.signal != Signal::Output) continue;
    const double e = value_of(n.target, n.k, res.posterior) - g->mean;
    sq += e * e;
    any = true;
  }
  if (any) res.squared_error = sq;
  return res;
}

std::string trace_csv(const ScenarioConfig& cfg, const ScenarioResult& res) {
  const Posterior& post = res.posterior;
  const LinearSSM& m = cfg.model;
  const int K = m.K;
  const std::vector<ScalarNode> nodes = layout(cfg);
  constexpr double inf = std::numeric_limits<double>::infinity();

  struct Cell {
    double lower = -inf, upper = inf, viol = 0.0;
    bool constrained = false;
  };
  const auto n = static_cast<std::size_t>(m.n()), mm = static_cast<std::size_t>(m.m()), p = static_cast<std::size_t>(m.p());
  std::vector<std::vector<Cell>> ucell(K, std::vector<Cell>(mm)), xcell(K, std::vector<Cell>(n)), ycell(K, std::vector<Cell>(p));
  struct CostCell {
    double cost = 0.0, lower = -inf, upper = inf, viol = 0.0;
    bool present = false, has_cost = true;
  };
  std::vector<std::vector<CostCell>> ccell(K, std::vector<CostCell>(cfg.blocks.size()));

  for (const ScalarNode& nd : nodes) {
    const ConstraintBlock& b = cfg.blocks[nd.block];
    const double v = value_of(nd.target, nd.k, post);
    const double viol = node_violation(nd, v);
    CostCell& cc = ccell[nd.k - 1][nd.block];
    cc.present = true;
    const double c = node_cost(nd, v);
    if (std::isnan(c)) {
      cc.has_cost = false;
    } else {
      cc.cost += c;
    }
    cc.viol = std::max(cc.viol, viol);
    const auto* prior = std::get_if<ConstraintPrior>(&nd.law);
    if (b.kind == BlockKind::Polyhedron) continue;
    double lo = -inf, hi = inf;
    if (prior) {
      std::tie(lo, hi) = bounds_of(*prior);
    } else {
      lo = hi = std::get<GaussianMsg>(nd.law).mean;
    }
    cc.lower = lo;
    cc.upper = hi;
    if (!prior || std::holds_alternative<LaplaceSpec>(*prior)) continue;
    Cell* cell = nullptr;
    double offset = 0.0;
    switch (b.signal) {
      case Signal::Input: cell = &ucell[nd.k - 1][b.channel]; break;
      case Signal::Shift: cell = &ucell[nd.k - 1][cfg.shift_base + b.channel]; break;
      case Signal::State: cell = &xcell[nd.k - 1][b.channel]; break;
      case Signal::Output: cell = &ycell[nd.k - 1][b.channel]; break;
      case Signal::ShiftedOutput:
        cell = &ycell[nd.k - 1][b.channel];
        offset = post.x_mean[nd.k - 1](base_states(cfg) + b.shift);
        break;
      default: break;
    }
    if (!cell) continue;
    cell->constrained = true;
    cell->lower = std::max(cell->lower, lo + offset);
    cell->upper = std::min(cell->upper, hi + offset);
    cell->viol = std::max(cell->viol, viol);
  }

  std::ostringstream os;
  os << "k,channel,kind,mean,variance,lower,upper,violation\n";
  auto row = [&](int k, const std::string& ch, const char* kind, double mean, double var, const Cell& c) {
    os << k << ',' << ch << ',' << kind << ',' << fmt(mean) << ',' << fmt(var) << ',' << fmt(c.lower) << ','
       << fmt(c.upper) << ',' << (c.constrained ? fmt(c.viol) : "") << '\n';
  };
  for (int k = 1; k <= K; ++k) {
    for (std::size_t j = 0; j < mm; ++j) row(k, cfg.names.inputs[j], "u", post.u_mean[k - 1](j), post.u_var[k - 1](j), ucell[k - 1][j]);
    for (std::size_t i = 0; i < n; ++i)
      row(k, cfg.names.states[i], "x", post.x_mean[k - 1](i), post.x_cov[k - 1](i, i), xcell[k - 1][i]);
    for (std::size_t i = 0; i < p; ++i) row(k, cfg.names.outputs[i], "y", post.y_mean[k - 1](i), post.y_var[k - 1](i), ycell[k - 1][i]);
    for (std::size_t bi = 0; bi < cfg.blocks.size(); ++bi) {
      const CostCell& cc = ccell[k - 1][bi];
      if (!cc.present) continue;
      Cell c{cc.lower, cc.upper, cc.viol, cfg.blocks[bi].kind != BlockKind::Gaussian};
      row(k, cfg.blocks[bi].name, "cost", cc.has_cost ? cc.cost : kNaN, kNaN, c);
    }
  }
  return os.str();
}

Json summary_json(const ScenarioConfig& cfg, const ScenarioResult& res) {
  Json j;
  j["name"] = cfg.name;
  j["description"] = cfg.description;
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  j["stop_reason"] = res.stop_reason;
  j["max_iter"] = cfg.solver.max_iter;
  j["horizon"] = cfg.model.K;
  j["seed"] = cfg.solver.seed;
  Json obj = Json::array();
  for (double v : res.objective_trace) obj.push_back(num(v));
  j["objective_trace"] = obj;
  j["final_objective"] = res.objective_trace.empty() ? Json(nullptr) : num(res.objective_trace.back());
  bool monotone = true;
  for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
    monotone = monotone && res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-8;
  j["objective_monotone"] = res.objective_trace.empty() ? Json(nullptr) : Json(monotone);
  Json ch = Json::array();
  for (double v : res.change_trace) ch.push_back(num(v));
  j["change_trace"] = ch;
  j["squared_error"] = res.squared_error ? num(*res.squared_error) : Json(nullptr);
  j["tolerance"] = res.report.tolerance;
  j["feasible"] = res.report.violations.empty();
  auto entry = [](const BlockViolation& b) {
    Json e;
    e["name"] = b.name;
    e["kind"] = to_string(b.kind);
    e["max_violation"] = b.max_violation;
    e["worst_k"] = b.worst_k;
    e["feasible"] = b.feasible;
    e["nodes"] = b.nodes;
    e["threshold_met"] = b.threshold_met;
    e["threshold_unknown"] = b.threshold_unknown;
    e["threshold_infeasible"] = b.threshold_infeasible;
    return e;
  };
  Json blocks = Json::array(), viols = Json::array();
  for (const BlockViolation& b : res.report.blocks) blocks.push_back(entry(b));
  for (const BlockViolation& b : res.report.violations) viols.push_back(entry(b));
  j["constraints"] = blocks;
  j["violations"] = viols;
  j["warnings"] = cfg.warnings;
  return j;
}

}  // namespace nuv
