// nuv: command-line front end for scalar sweeps, cost curves and scenarios.
#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nuv/error.hpp"
#include "nuv/polyhedron.hpp"
#include "nuv/scalar_lab.hpp"
#include "nuv/scenario.hpp"

namespace fs = std::filesystem;
using namespace nuv;

namespace {

constexpr int kOk = 0;
constexpr int kBadInput = 2;
constexpr int kScalarNonConvergence = 3;
constexpr int kScenarioNonConvergence = 4;

std::string fmt(double x) {
  if (!std::isfinite(x)) return "";
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string default_out_dir() {
  const char* env = std::getenv("NUV_OUT_DIR");
  return env && *env ? env : ".";
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  f << text;
}

std::vector<double> grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi)) throw Error(ErrorKind::ConfigError, "grid needs finite bounds and a positive step");
  std::vector<double> out;
  const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

struct PriorArgs {
  std::string prior = "box";
  double a = -1.0;
  double b = 1.0;
  double gamma = 1.0;
  std::string side = "ge";

  void add(CLI::App* app) {
    app->add_option("--prior", prior, "Prior type")->check(CLI::IsMember({"laplace", "box", "halfspace"}))->capture_default_str();
    app->add_option("--a", a, "Centre (laplace), lower bound (box) or bound (halfspace)")->capture_default_str();
    app->add_option("--b", b, "Upper bound (box)")->capture_default_str();
    app->add_option("--gamma", gamma, "Slope gamma > 0")->capture_default_str();
    app->add_option("--side", side, "Half-space side: ge (x >= a) or le (x <= a)")->check(CLI::IsMember({"ge", "le"}))->capture_default_str();
  }

  ConstraintPrior build() const {
    ConstraintPrior p;
    if (prior == "laplace") {
      p = LaplaceSpec{a, gamma};
    } else if (prior == "box") {
      p = BoxSpec{a, b, gamma};
    } else {
      p = HalfSpaceSpec{a, side == "ge" ? Side::RightOf : Side::LeftOf, gamma};
    }
    validate(p);
    return p;
  }

  Json describe() const {
    Json j{{"prior", prior}, {"a", a}, {"gamma", gamma}};
    if (prior == "box") j["b"] = b;
    if (prior == "halfspace") j["side"] = side;
    return j;
  }
};

int cmd_scalar_sweep(const PriorArgs& pa, const std::vector<double>& mus, const std::vector<double>& s2, const SweepOptions& opt,
                     bool oracle, const fs::path& out, const std::string& name) {
  if (mus.empty()) throw Error(ErrorKind::ConfigError, "empty mu grid");
  if (s2.empty()) throw Error(ErrorKind::ConfigError, "empty s2 list");
  for (double s : s2)
    if (!(s > 0.0)) throw Error(ErrorKind::ConfigError, "s2 values must be positive");
  const ConstraintPrior prior = pa.build();
  SweepOptions o = opt;
  if (!oracle) o.oracle_step = 0.0;
  const std::vector<SweepRow> rows = characteristic_sweep(prior, mus, s2, o);

  std::ostringstream csv;
  csv << "s_sq,mu,x_hat,oracle_x_hat,threshold,feasible,converged,iterations\n";
  bool all_converged = true;
  for (const SweepRow& r : rows) {
    const double thr = pa.prior == "laplace" ? NAN : feasibility_threshold(r.mu, prior);
    csv << fmt(r.s_sq) << ',' << fmt(r.mu) << ',' << fmt(r.x_hat) << ',' << (oracle ? fmt(r.oracle_x_hat) : "") << ','
        << fmt(thr) << ',' << (r.feasible ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << '\n';
    all_converged = all_converged && r.converged;
  }
  Json j = pa.describe();
  j["rows"] = rows.size();
  j["mu_count"] = mus.size();
  j["s_sq"] = s2;
  j["all_converged"] = all_converged;
  Json thr = Json::array();
  for (double s : s2) {
    Json t{{"s_sq", s}};
    // mu interval whose estimate is feasible, from threshold(mu) <= s2
    if (pa.prior == "box") {
      t["mu_feasible_lo"] = pa.a - 2.0 * pa.gamma * s;
      t["mu_feasible_hi"] = pa.b + 2.0 * pa.gamma * s;
    } else if (pa.prior == "halfspace") {
      t["mu_feasible_lo"] = pa.side == "ge" ? Json(pa.a - 2.0 * pa.gamma * s) : Json(nullptr);
      t["mu_feasible_hi"] = pa.side == "ge" ? Json(nullptr) : Json(pa.a + 2.0 * pa.gamma * s);
    }
    thr.push_back(t);
  }
  j["thresholds"] = thr;
  write_file(out / (name + ".csv"), csv.str());
  write_file(out / (name + ".json"), j.dump(2) + "\n");
  if (!all_converged) {
    std::cerr << "nuv: scalar solve did not converge at some grid points\n";
    return kScalarNonConvergence;
  }
  return kOk;
}

PolyhedronSpec load_polyhedron(const std::string& source, double gamma, std::vector<std::string>& warnings) {
  if (source == "triangle") return triangle_polyhedron(gamma);
  std::ifstream f(source);
  if (!f) throw Error(ErrorKind::ConfigError, "cannot read polyhedron file " + source);
  std::stringstream ss;
  ss << f.rdbuf();
  const Json j = parse_json_text(ss.str(), source);
  if (!j.is_object() || !j.contains("faces") || !j["faces"].is_array())
    throw Error(ErrorKind::ConfigError, source + ": expected an object with a faces array");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "faces" && it.key() != "gamma") throw Error(ErrorKind::ConfigError, source + ": unknown key " + it.key());
  PolyhedronSpec p;
  p.gamma = j.value("gamma", gamma);
  for (const Json& face : j["faces"]) {
    for (auto it = face.begin(); it != face.end(); ++it)
      if (it.key() != "normal" && it.key() != "offset" && it.key() != "side")
        throw Error(ErrorKind::ConfigError, source + ": unknown face key " + it.key());
    const std::vector<double> n = face.at("normal").get<std::vector<double>>();
    p.normals.push_back(Eigen::Map<const Eigen::VectorXd>(n.data(), static_cast<Eigen::Index>(n.size())));
    p.offsets.push_back(face.at("offset").get<double>());
    const std::string side = face.at("side").get<std::string>();
    if (side != "ge" && side != "le") throw Error(ErrorKind::ConfigError, source + ": side must be ge or le");
    p.sides.push_back(side == "ge" ? Side::RightOf : Side::LeftOf);
  }
  p = normalized(p, &warnings);
  validate(p);
  return p;
}

int cmd_cost_eval(const PriorArgs& pa, const std::string& poly_src, double lo, double hi, double step, double lo2,
                  double hi2, const fs::path& out, const std::string& name) {
  std::ostringstream csv;
  Json j;
  const std::vector<double> xs = grid(lo, hi, step);
  if (poly_src.empty()) {
    const ConstraintPrior prior = pa.build();
    csv << "x,cost\n";
    double zero_lo = NAN, zero_hi = NAN;
    for (double x : xs) {
      const double c = cost(x, prior);
      csv << fmt(x) << ',' << fmt(c) << '\n';
      if (c <= 1e-12) {
        if (std::isnan(zero_lo)) zero_lo = x;
        zero_hi = x;
      }
    }
    j = pa.describe();
    j["points"] = xs.size();
    j["zero_set_lo"] = num(zero_lo);
    j["zero_set_hi"] = num(zero_hi);
  } else {
    std::vector<std::string> warnings;
    const PolyhedronSpec p = load_polyhedron(poly_src, pa.gamma, warnings);
    if (p.dim() != 2) throw Error(ErrorKind::ConfigError, "cost-eval renders two-dimensional polyhedra only");
    for (const std::string& w : warnings) std::cerr << "nuv: warning: " << w << '\n';
    const std::vector<double> ys = grid(lo2, hi2, step);
    csv << "y1,y2,cost\n";
    std::size_t zeros = 0;
    for (double y2 : ys)
      for (double y1 : xs) {
        const double c = polyhedron_cost(Eigen::Vector2d(y1, y2), p);
        zeros += c <= 1e-12;
        csv << fmt(y1) << ',' << fmt(y2) << ',' << fmt(c) << '\n';
      }
    j["polyhedron"] = poly_src;
    j["gamma"] = p.gamma;
    j["faces"] = p.faces();
    j["points"] = xs.size() * ys.size();
    j["zero_points"] = zeros;
    j["warnings"] = warnings;
  }
  write_file(out / (name + ".csv"), csv.str());
  write_file(out / (name + ".json"), j.dump(2) + "\n");
  return kOk;
}

int cmd_run_scenario(const std::string& which, const std::string& config_path, const std::vector<std::string>& sets,
                     const fs::path& out) {
  if (which.empty() == config_path.empty())
    throw Error(ErrorKind::ConfigError, "give either a builtin scenario name or --config");
  Json tree;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw Error(ErrorKind::ConfigError, "cannot read config " + config_path);
    std::stringstream ss;
    ss << f.rdbuf();
    tree = parse_json_text(ss.str(), config_path);
  } else {
    tree = builtin_scenario_tree(which);
  }
  for (const std::string& s : sets) apply_override(tree, s);
  const ScenarioConfig cfg = parse_scenario(tree);
  for (const std::string& w : cfg.warnings) std::cerr << "nuv: warning: " << w << '\n';
  const ScenarioResult res = run_scenario(cfg);
  write_file(out / (cfg.name + ".csv"), trace_csv(cfg, res));
  write_file(out / (cfg.name + ".json"), summary_json(cfg, res).dump(2) + "\n");
  std::cout << cfg.name << ": " << (res.converged ? "converged" : "not converged") << " after " << res.iterations
            << " iterations, " << res.report.violations.size() << " violated constraint blocks\n";
  return res.converged ? kOk : kScenarioNonConvergence;
}

int cmd_list(bool as_json) {
  Json j = Json::array();
  for (const std::string& n : builtin_scenario_names()) {
    const Json t = builtin_scenario_tree(n);
    if (as_json) {
      j.push_back({{"name", n}, {"description", t.value("description", "")}, {"horizon", t["horizon"]}});
    } else {
      std::cout << n << "\t" << t.value("description", "") << '\n';
    }
  }
  if (as_json) std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NUV constraint priors: scalar sweeps, cost curves and state-space scenarios"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir = default_out_dir();
  app.add_option("--out", out_dir, "Output directory (default: $NUV_OUT_DIR or .)");

  PriorArgs sweep_prior;
  std::vector<double> mus, s2{1.0, 0.5, 0.1};
  double mu_min = -3.0, mu_max = 3.0, mu_step = 0.05;
  SweepOptions sweep_opt;
  sweep_opt.max_iter = 100000;
  bool no_oracle = false;
  std::string sweep_name = "sweep";
  auto* sweep = app.add_subcommand("scalar-sweep", "Scalar MAP estimate versus the observation mean mu");
  sweep_prior.add(sweep);
  sweep->add_option("--s2", s2, "Comma-separated observation variances")->delimiter(',')->capture_default_str();
  sweep->add_option("--mu", mus, "Comma-separated mu values (overrides the range options)")->delimiter(',');
  sweep->add_option("--mu-min", mu_min, "First mu of the grid")->capture_default_str();
  sweep->add_option("--mu-max", mu_max, "Last mu of the grid")->capture_default_str();
  sweep->add_option("--mu-step", mu_step, "Grid step")->capture_default_str();
  sweep->add_option("--tol", sweep_opt.tol, "Convergence tolerance on |delta x|")->capture_default_str();
  sweep->add_option("--max-iter", sweep_opt.max_iter, "Iteration cap per grid point")->capture_default_str();
  sweep->add_option("--oracle-step", sweep_opt.oracle_step, "Brute-force grid step")->capture_default_str();
  sweep->add_flag("--no-oracle", no_oracle, "Skip the brute-force reference column");
  sweep->add_option("--name", sweep_name, "Basename of the CSV and JSON outputs")->capture_default_str();

  PriorArgs cost_prior;
  std::string poly_src, cost_name = "cost";
  double x_min = -3.0, x_max = 3.0, step = 0.01, y2_min = -3.0, y2_max = 3.0;
  auto* costc = app.add_subcommand("cost-eval", "Evaluate a prior cost on a grid, or a polyhedron cost on a 2-D grid");
  cost_prior.add(costc);
  costc->add_option("--polyhedron", poly_src, "'triangle' or a JSON file {faces: [{normal, offset, side}], gamma}");
  costc->add_option("--x-min", x_min, "Grid start (first coordinate)")->capture_default_str();
  costc->add_option("--x-max", x_max, "Grid end (first coordinate)")->capture_default_str();
  costc->add_option("--y-min", y2_min, "Grid start of the second coordinate (polyhedron)")->capture_default_str();
  costc->add_option("--y-max", y2_max, "Grid end of the second coordinate (polyhedron)")->capture_default_str();
  costc->add_option("--step", step, "Grid step")->capture_default_str();
  costc->add_option("--name", cost_name, "Basename of the CSV and JSON outputs")->capture_default_str();

  std::string which, config_path;
  std::vector<std::string> sets;
  auto* run = app.add_subcommand("run-scenario", "Solve a builtin or file-based scenario and write its trace");
  run->add_option("scenario", which, "Builtin scenario name (see list-scenarios)");
  run->add_option("--config", config_path, "Scenario config file (JSON)");
  run->add_option("--set", sets, "Override a config entry: dotted.path=value (repeatable)");

  bool list_json = false;
  auto* list = app.add_subcommand("list-scenarios", "Print the builtin scenario names");
  list->add_flag("--json", list_json, "Print as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    const fs::path out(out_dir);
    if (sweep->parsed()) {
      if (mus.empty() && sweep->count("--mu") == 0) mus = grid(mu_min, mu_max, mu_step);
      return cmd_scalar_sweep(sweep_prior, mus, s2, sweep_opt, !no_oracle, out, sweep_name);
    }
    if (costc->parsed()) {
      if (!poly_src.empty() && costc->count("--x-min") == 0) {
        x_min = -2.0;
        x_max = 6.0;
        y2_min = 0.0;
        y2_max = 6.0;
        if (costc->count("--step") == 0) step = 0.05;
      }
      return cmd_cost_eval(cost_prior, poly_src, x_min, x_max, step, y2_min, y2_max, out, cost_name);
    }
    if (run->parsed()) return cmd_run_scenario(which, config_path, sets, out);
    if (list->parsed()) return cmd_list(list_json);
  } catch (const Error& e) {
    std::cerr << "nuv: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "nuv: error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}
