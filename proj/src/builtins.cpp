#include <algorithm>
#include <cmath>
#include <numbers>

#include "nuv/error.hpp"
#include "nuv/scenario.hpp"

namespace nuv {

namespace {

using std::numbers::pi;

template <class F>
Json series(int from, int to, F f) {
  Json a = Json::array();
  for (int k = from; k <= to; ++k) a.push_back(f(k));
  return a;
}

Json solver(int max_iter = 2000, double tol = 1e-8) {
  return {{"max_iter", max_iter}, {"tol", tol}, {"init_variance", 1.0}, {"gamma_ramp", 1.0}, {"seed", 1}};
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Sinusoid faded in over the first 30 samples so the filter can follow from rest.
double sinusoid_target(int k) { return 1.4 * smoothstep(k / 30.0) * std::sin(2.0 * pi * k / 50.0); }

Json box_input() {
  const int K = 150;
  Json c;
  c["target"] = {{"kind", "gaussian"}, {"signal", "y"}, {"channel", 0},
                 {"mean", series(1, K, sinusoid_target)},
                 {"variance", 0.03}};
  c["energy"] = {{"kind", "gaussian"}, {"signal", "u"}, {"channel", 0}, {"mean", 0.0}, {"variance", 1.0}};
  c["input_box"] = {{"kind", "box"}, {"signal", "u"}, {"channel", 0}, {"lo", -1.0}, {"hi", 1.0}, {"gamma", 10.0}};
  return {{"name", "box-input"},
          {"description", "low-pass filter tracking a sinusoid with every input boxed to [-1, 1]"},
          {"horizon", K},
          {"model", {{"type", "lowpass3"}}},
          {"constraints", c},
          {"solver", solver()}};
}

Json halfspace_input() {
  const int K = 150;
  Json c;
  c["target"] = {{"kind", "gaussian"}, {"signal", "y"}, {"channel", 0},
                 {"mean", series(1, K, sinusoid_target)},
                 {"variance", 0.03}};
  c["energy"] = {{"kind", "gaussian"}, {"signal", "u"}, {"channel", 0}, {"mean", 0.0}, {"variance", 1.0}};
  c["input_floor"] = {{"kind", "halfspace"}, {"signal", "u"}, {"channel", 0}, {"bound", -1.0}, {"side", "ge"},
                      {"gamma", 5.0}};
  return {{"name", "halfspace-input"},
          {"description", "low-pass filter tracking a sinusoid with every input bounded below by -1"},
          {"horizon", K},
          {"model", {{"type", "lowpass3"}}},
          {"constraints", c},
          {"solver", solver()}};
}

// Corridor centre for the single-corridor scenario.
double corridor_centre(int k) {
  return 0.6 * smoothstep((k - 20) / 25.0) - 1.1 * smoothstep((k - 70) / 25.0) + 0.5 * smoothstep((k - 120) / 15.0);
}

Json ternary_blocks(Json& c) {
  c["ternary_a"] = {{"kind", "binary"}, {"signal", "u"}, {"channel", 0}, {"levels", {-0.5, 0.5}}};
  c["ternary_b"] = {{"kind", "binary"}, {"signal", "u"}, {"channel", 1}, {"levels", {-0.5, 0.5}}};
  return c;
}

Json corridor_output() {
  const int K = 150;
  Json c;
  ternary_blocks(c);
  c["corridor"] = {{"kind", "box"}, {"signal", "y"}, {"channel", 0},
                   {"lo", series(1, K, [](int k) { return corridor_centre(k) - 0.25; })},
                   {"hi", series(1, K, [](int k) { return corridor_centre(k) + 0.25; })},
                   {"gamma", 30.0}};
  return {{"name", "corridor-output"},
          {"description", "ternary input steering a low-pass filter output through a corridor"},
          {"horizon", K},
          {"model", {{"type", "lowpass3"}, {"input_copies", 2}}},
          {"constraints", c},
          {"solver", solver()}};
}

// Lower corridor and the offset to the upper one; the two overlap in the middle.
double lower_centre(int k) { return -0.5 + 0.2 * std::sin(2.0 * pi * k / 150.0); }
double corridor_gap(int k) { return 1.1 - 0.8 * smoothstep((k - 45) / 20.0) + 0.8 * smoothstep((k - 95) / 20.0); }

Json shifted_corridors() {
  const int K = 150;
  Json c;
  ternary_blocks(c);
  c["shift"] = {{"kind", "binary"}, {"signal", "shift"}, {"channel", 0},
                {"levels", {0.0, series(1, K, corridor_gap)}}};
  c["corridor"] = {{"kind", "box"}, {"signal", "y_shifted"}, {"channel", 0}, {"shift", 0},
                   {"lo", series(1, K, [](int k) { return lower_centre(k) - 0.2; })},
                   {"hi", series(1, K, [](int k) { return lower_centre(k) + 0.2; })},
                   {"gamma", 10.0}};
  c["target"] = {{"kind", "gaussian"}, {"signal", "y"}, {"channel", 0}, {"range", {1, K}},
                 {"mean", series(1, K, [](int k) { return k < 75 ? 0.5 : -0.5; })}, {"variance", 4.0}};
  return {{"name", "shifted-corridors"},
          {"description", "ternary input keeping the output in either of two corridors via a binary shift"},
          {"horizon", K},
          {"model", {{"type", "lowpass3"}, {"input_copies", 2}, {"shifts", 1}}},
          {"constraints", c},
          {"solver", solver()}};
}

Json flappy_bird() {
  const int K = 100;
  struct Slit {
    int from, to;
    double lo, hi, gap;
  };
  const Slit slits[] = {{30, 33, -1.6, -0.6, 2.6}, {65, 68, -0.4, 0.6, 2.4}};
  Json idx = Json::array(), lo = Json::array(), hi = Json::array(), gap = Json::array(), free_idx = Json::array();
  for (int k = 1; k <= K; ++k) {
    bool in_slit = false;
    for (const Slit& s : slits) {
      if (k < s.from || k > s.to) continue;
      in_slit = true;
      idx.push_back(k);
      lo.push_back(s.lo);
      hi.push_back(s.hi);
      gap.push_back(s.gap);
    }
    if (!in_slit) free_idx.push_back(k);
  }
  Json c;
  c["thrust"] = {{"kind", "binary"}, {"signal", "u"}, {"channel", 0}, {"levels", {0.0, 1.0}}};
  c["slits"] = {{"kind", "box"}, {"signal", "y_shifted"}, {"channel", 0}, {"shift", 0}, {"indices", idx},
                {"lo", lo}, {"hi", hi}, {"gamma", 10.0}};
  c["slit_choice"] = {{"kind", "binary"}, {"signal", "shift"}, {"channel", 0}, {"indices", idx},
                      {"levels", {0.0, gap}}};
  c["shift_idle"] = {{"kind", "gaussian"}, {"signal", "shift"}, {"channel", 0}, {"indices", free_idx},
                     {"mean", 0.0}, {"variance", 1.0}};
  return {{"name", "flappy-bird"},
          {"description", "binary thrust steering a falling point mass through two double slits"},
          {"horizon", K},
          {"model", {{"type", "flappy"}, {"gravity", -0.05}, {"impulse", 0.15}, {"shifts", 1}}},
          {"constraints", c},
          {"solver", solver()}};
}

Json face(double n1, double n2, double offset, const char* side) {
  return {{"normal", {n1, n2}}, {"offset", offset}, {"side", side}};
}

Json polyhedron_waypoints() {
  const int K = 60;
  const double r13 = std::sqrt(13.0), r5 = std::sqrt(5.0);
  Json c;
  c["energy"] = {{"kind", "gaussian"}, {"signal", "u"}, {"channel", 0}, {"mean", 0.0}, {"variance", 0.01}};
  c["energy_y"] = {{"kind", "gaussian"}, {"signal", "u"}, {"channel", 1}, {"mean", 0.0}, {"variance", 0.01}};
  c["triangle"] = {{"kind", "polyhedron"}, {"indices", {15}}, {"gamma", 1.0},
                   {"faces", {face(2 / r13, 3 / r13, r13, "ge"), face(-1 / r5, 2 / r5, r5, "ge"), face(0, 1, 5, "le")}}};
  c["square"] = {{"kind", "polyhedron"}, {"indices", {30}}, {"gamma", 1.0},
                 {"faces", {face(1, 0, 6, "ge"), face(1, 0, 7, "le"), face(0, 1, 1, "ge"), face(0, 1, 2, "le")}}};
  c["diamond"] = {{"kind", "polyhedron"}, {"indices", {45}}, {"gamma", 1.0},
                  {"faces", {face(1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0.0, "ge"),
                             face(1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 1.0, "le"),
                             face(1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 3.0, "ge"),
                             face(1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 4.0, "le")}}};
  c["home"] = {{"kind", "polyhedron"}, {"indices", {60}}, {"gamma", 1.0},
               {"faces", {face(1, 0, -1, "ge"), face(0, 1, -1, "ge"), face(1 / std::sqrt(2.0), 1 / std::sqrt(2.0), -0.5 / std::sqrt(2.0), "le")}}};
  return {{"name", "polyhedron-waypoints"},
          {"description", "planar double integrator visiting four convex regions with minimum input energy"},
          {"horizon", K},
          {"model", {{"type", "double_integrator"}, {"dims", 2}, {"names", {{"inputs", {"ax", "ay"}}, {"states", {"px", "py", "vx", "vy"}}, {"outputs", {"px", "py"}}}}}},
          {"constraints", c},
          {"solver", solver()}};
}

Json reservoir() {
  const int K = 200;
  Json c;
  c["target_V3"] = {{"kind", "gaussian"}, {"signal", "y"}, {"channel", 2}, {"mean", 80.0}, {"variance", 1.0}};
  const char* names[] = {"level_V1", "level_V2", "level_V3"};
  const double vmax[] = {100.0, 60.0, 100.0};
  for (int i = 0; i < 3; ++i)
    c[names[i]] = {{"kind", "box"}, {"signal", "x"}, {"channel", i}, {"lo", 0.0}, {"hi", vmax[i]}, {"gamma", 1.0}};
  const char* flows[] = {"flow_12", "flow_13", "flow_23", "flow_3out"};
  const double lo[] = {-1.0, -1.5, -1.0, 0.0}, hi[] = {1.0, 2.5, 1.5, 4.0};
  for (int i = 0; i < 4; ++i)
    c[flows[i]] = {{"kind", "box"}, {"signal", "x"}, {"channel", 3 + i}, {"lo", lo[i]}, {"hi", hi[i]}, {"gamma", 1.0}};
  const char* incs[] = {"sparse_12", "sparse_13", "sparse_23", "sparse_3out"};
  for (int i = 0; i < 4; ++i)
    c[incs[i]] = {{"kind", "laplace"}, {"signal", "u"}, {"channel", i}, {"center", 0.0}, {"gamma", 1.0}};
  Json dist = Json::array();
  dist.push_back({{"reservoir", 3}, {"start", 55}, {"stop", 64}, {"rate", 2.5}});
  dist.push_back({{"reservoir", 1}, {"start", 90}, {"stop", 100}, {"rate", 0.5}});
  dist.push_back({{"reservoir", 3}, {"start", 135}, {"stop", 146}, {"rate", 3.5}});
  return {{"name", "reservoir"},
          {"description", "three interconnected reservoirs holding V3 at 80 with sparse pump changes"},
          {"horizon", K},
          {"model", {{"type", "reservoir"}, {"x0_mean", {50.0, 30.0, 80.0, 0.0, 0.0, 0.0, 0.0}}, {"disturbances", dist}}},
          {"constraints", c},
          {"solver", solver()}};
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"box-input",         "corridor-output",      "shifted-corridors", "flappy-bird",
          "halfspace-input",   "polyhedron-waypoints", "reservoir"};
}

Json builtin_scenario_tree(const std::string& name) {
  if (name == "box-input") return box_input();
  if (name == "corridor-output") return corridor_output();
  if (name == "shifted-corridors") return shifted_corridors();
  if (name == "flappy-bird") return flappy_bird();
  if (name == "halfspace-input") return halfspace_input();
  if (name == "polyhedron-waypoints") return polyhedron_waypoints();
  if (name == "reservoir") return reservoir();
  throw Error(ErrorKind::ConfigError, "unknown scenario '" + name + "'");
}

std::vector<ScenarioConfig> builtin_scenarios() {
  std::vector<ScenarioConfig> out;
  for (const std::string& n : builtin_scenario_names()) out.push_back(parse_scenario(builtin_scenario_tree(n)));
  return out;
}

}  // namespace nuv
