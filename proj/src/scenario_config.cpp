#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nuv/error.hpp"
#include "nuv/scenario.hpp"

namespace nuv {

namespace {

std::string detail(const Error& e) {
  const std::string w = e.what();
  const std::string prefix = std::string(to_string(e.kind())) + ": ";
  return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigError, path + ": " + what);
}

void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

const Json* find(const Json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

double number_or(const Json& obj, const std::string& key, const std::string& path, double fallback) {
  const Json* v = find(obj, key);
  return v ? as_number(*v, path + "." + key) : fallback;
}

double required_number(const Json& obj, const std::string& key, const std::string& path) {
  const Json* v = find(obj, key);
  if (!v) fail(path + "." + key, "missing");
  return as_number(*v, path + "." + key);
}

int as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

int int_or(const Json& obj, const std::string& key, const std::string& path, int fallback) {
  const Json* v = find(obj, key);
  return v ? as_int(*v, path + "." + key) : fallback;
}

std::string string_or(const Json& obj, const std::string& key, const std::string& path, const std::string& fallback) {
  const Json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(path + "." + key, "expected a string");
  return v->get<std::string>();
}

Eigen::VectorXd as_vector(const Json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = as_number(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

Eigen::MatrixXd as_matrix(const Json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
  const Eigen::VectorXd first = as_vector(v[0], path + "[0]");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(v.size()), first.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::VectorXd r = as_vector(v[i], path + "[" + std::to_string(i) + "]");
    if (r.size() != first.size()) fail(path, "rows differ in length");
    out.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return out;
}

/// Scalar broadcast or one value per constrained index.
std::vector<double> per_index(const Json& obj, const std::string& key, std::size_t n, const std::string& path,
                              std::optional<double> fallback) {
  const Json* v = find(obj, key);
  const std::string p = path + "." + key;
  if (!v) {
    if (!fallback) fail(p, "missing");
    return std::vector<double>(n, *fallback);
  }
  if (v->is_number()) return std::vector<double>(n, as_number(*v, p));
  if (!v->is_array()) fail(p, "expected a number or an array with one value per index");
  if (v->size() != n)
    fail(p, "has " + std::to_string(v->size()) + " values for " + std::to_string(n) + " indices");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = as_number((*v)[i], p + "[" + std::to_string(i) + "]");
  return out;
}

Side parse_side(const Json& v, const std::string& path) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "ge") return Side::RightOf;
    if (s == "le") return Side::LeftOf;
  }
  fail(path, "side must be \"ge\" or \"le\"");
}

void set_x0(LinearSSM& m, const Json& spec, const std::string& path, const Eigen::VectorXd& default_mean) {
  Eigen::VectorXd mean = default_mean;
  if (const Json* v = find(spec, "x0_mean")) {
    mean = as_vector(*v, path + ".x0_mean");
    if (mean.size() != m.n()) fail(path + ".x0_mean", "expected " + std::to_string(m.n()) + " entries");
  }
  Eigen::VectorXd var = Eigen::VectorXd::Constant(m.n(), 1e-8);
  if (const Json* v = find(spec, "x0_var")) {
    if (v->is_number()) {
      var.setConstant(as_number(*v, path + ".x0_var"));
    } else {
      var = as_vector(*v, path + ".x0_var");
      if (var.size() != m.n()) fail(path + ".x0_var", "expected " + std::to_string(m.n()) + " entries");
    }
  }
  if ((var.array() <= 0.0).any()) fail(path + ".x0_var", "variances must be positive");
  m.x0 = GaussianVecMsg{mean, var.asDiagonal().toDenseMatrix()};
}

std::vector<std::string> default_names(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

struct BuiltModel {
  LinearSSM model;
  ChannelNames names;
  int shift_base = 0;
  int shifts = 0;
};

BuiltModel parse_model(const Json& spec, int K) {
  const std::string path = "model";
  if (!spec.is_object()) fail(path, "expected an object");
  const std::string type = string_or(spec, "type", path, "");
  const std::set<std::string> common = {"type", "x0_mean", "x0_var", "shifts", "names"};
  auto keys = [&](std::initializer_list<const char*> extra) {
    std::set<std::string> allowed = common;
    for (const char* e : extra) allowed.insert(e);
    check_keys(spec, path, allowed);
  };

  BuiltModel out;
  LinearSSM& m = out.model;
  if (type == "lowpass3") {
    keys({"omega0", "input_copies"});
    const int copies = int_or(spec, "input_copies", path, 1);
    if (copies < 1) fail(path + ".input_copies", "must be at least 1");
    const double omega0 = number_or(spec, "omega0", path, 2.0 * 3.14159265358979323846 * 0.05);
    if (!(omega0 > 0.0)) fail(path + ".omega0", "must be positive");
    m = lowpass3(K, omega0, copies);
    set_x0(m, spec, path, Eigen::VectorXd::Zero(3));
  } else if (type == "double_integrator") {
    keys({"dims"});
    const int d = int_or(spec, "dims", path, 1);
    if (d < 1) fail(path + ".dims", "must be at least 1");
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    m.A = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    m.A << I, I, Eigen::MatrixXd::Zero(d, d), I;
    m.B = Eigen::MatrixXd::Zero(2 * d, d);
    m.B.bottomRows(d) = I;
    m.C = Eigen::MatrixXd::Zero(d, 2 * d);
    m.C.leftCols(d) = I;
    m.K = K;
    set_x0(m, spec, path, Eigen::VectorXd::Zero(2 * d));
  } else if (type == "flappy") {
    keys({"gravity", "impulse"});
    const double gravity = number_or(spec, "gravity", path, -0.05);
    const double impulse = number_or(spec, "impulse", path, 0.15);
    m.A = (Eigen::MatrixXd(2, 2) << 1, 1, 0, 1).finished();
    m.B = (Eigen::MatrixXd(2, 1) << 0, impulse).finished();
    m.C = (Eigen::MatrixXd(1, 2) << 1, 0).finished();
    m.K = K;
    m.drive.assign(K, Eigen::Vector2d(0.0, gravity));
    set_x0(m, spec, path, Eigen::VectorXd::Zero(2));
    out.names = {{"thrust"}, {"height", "velocity"}, {"height"}};
  } else if (type == "reservoir") {
    keys({"disturbances"});
    // levels V1..V3 followed by the flows f12, f13, f23, f3out
    Eigen::MatrixXd M(3, 4);
    M << -1, -1, 0, 0, 1, 0, -1, 0, 0, 1, 1, -1;
    m.A = Eigen::MatrixXd::Identity(7, 7);
    m.A.topRightCorner(3, 4) = M;
    m.B = Eigen::MatrixXd::Zero(7, 4);
    m.B.topRows(3) = M;
    m.B.bottomRows(4) = Eigen::MatrixXd::Identity(4, 4);
    m.C = Eigen::MatrixXd::Identity(7, 7);
    m.K = K;
    m.drive.assign(K, Eigen::VectorXd::Zero(7));
    if (const Json* d = find(spec, "disturbances")) {
      if (!d->is_array()) fail(path + ".disturbances", "expected an array");
      for (std::size_t i = 0; i < d->size(); ++i) {
        const std::string p = path + ".disturbances[" + std::to_string(i) + "]";
        const Json& e = (*d)[i];
        check_keys(e, p, {"reservoir", "start", "stop", "rate"});
        const int r = int_or(e, "reservoir", p, 0);
        const int start = int_or(e, "start", p, 1);
        const int stop = int_or(e, "stop", p, start);
        const double rate = required_number(e, "rate", p);
        if (r < 1 || r > 3) fail(p + ".reservoir", "must be 1, 2 or 3");
        if (start < 1 || stop > K || start > stop) fail(p, "pulse must lie within [1, horizon]");
        for (int k = start; k <= stop; ++k) m.drive[k - 1](r - 1) += rate;
      }
    }
    set_x0(m, spec, path, Eigen::VectorXd::Zero(7));
    out.names = {{"dF12", "dF13", "dF23", "dF3out"},
                 {"V1", "V2", "V3", "F12", "F13", "F23", "F3out"},
                 {"V1", "V2", "V3", "F12", "F13", "F23", "F3out"}};
  } else if (type == "matrix") {
    keys({"A", "B", "C", "drive"});
    for (const char* key : {"A", "B", "C"})
      if (!find(spec, key)) fail(path + "." + key, "missing");
    m.A = as_matrix(spec["A"], path + ".A");
    m.B = as_matrix(spec["B"], path + ".B");
    m.C = as_matrix(spec["C"], path + ".C");
    m.K = K;
    if (m.A.rows() != m.A.cols() || m.B.rows() != m.A.rows() || m.C.cols() != m.A.rows())
      fail(path, "A must be n x n, B n x m and C p x n");
    if (const Json* d = find(spec, "drive")) {
      const Eigen::VectorXd w = as_vector(*d, path + ".drive");
      if (w.size() != m.A.rows()) fail(path + ".drive", "expected " + std::to_string(m.A.rows()) + " entries");
      m.drive.assign(K, w);
    }
    set_x0(m, spec, path, Eigen::VectorXd::Zero(m.A.rows()));
  } else {
    fail(path + ".type", "unknown model type '" + type + "'");
  }

  const Eigen::Index n = m.n(), mm = m.m(), p = m.p();
  if (out.names.inputs.empty()) out.names = {default_names("u", mm), default_names("x", n), default_names("y", p)};

  out.shift_base = static_cast<int>(mm);
  out.shifts = int_or(spec, "shifts", path, 0);
  if (out.shifts < 0) fail(path + ".shifts", "must be non-negative");
  if (out.shifts > 0) {
    const int S = out.shifts;
    LinearSSM a;
    a.A = Eigen::MatrixXd::Zero(n + S, n + S);
    a.A.topLeftCorner(n, n) = m.A;
    a.B = Eigen::MatrixXd::Zero(n + S, mm + S);
    a.B.topLeftCorner(n, mm) = m.B;
    a.B.bottomRightCorner(S, S) = Eigen::MatrixXd::Identity(S, S);
    a.C = Eigen::MatrixXd::Zero(p, n + S);
    a.C.leftCols(n) = m.C;
    a.K = K;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n + S);
    mean.head(n) = m.x0.mean;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n + S, n + S);
    cov.topLeftCorner(n, n) = m.x0.covariance;
    a.x0 = GaussianVecMsg{mean, cov};
    for (const Eigen::VectorXd& w : m.drive) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n + S);
      v.head(n) = w;
      a.drive.push_back(v);
    }
    m = a;
    for (int s = 0; s < S; ++s) {
      out.names.inputs.push_back("shift" + std::to_string(s));
      out.names.states.push_back("s" + std::to_string(s));
    }
  }

  if (const Json* nm = find(spec, "names")) {
    check_keys(*nm, path + ".names", {"inputs", "states", "outputs"});
    auto take = [&](const char* key, std::vector<std::string>& dst) {
      const Json* v = find(*nm, key);
      if (!v) return;
      const std::string p2 = path + ".names." + key;
      if (!v->is_array() || v->size() != dst.size())
        fail(p2, "expected " + std::to_string(dst.size()) + " names");
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) fail(p2, "names must be strings");
        dst[i] = (*v)[i].get<std::string>();
      }
    };
    take("inputs", out.names.inputs);
    take("states", out.names.states);
    take("outputs", out.names.outputs);
  }

  try {
    m.validate();
  } catch (const Error& e) {
    fail(path, detail(e));
  }
  return out;
}

std::vector<int> parse_indices(const Json& b, const std::string& path, int K) {
  const Json* range = find(b, "range");
  const Json* list = find(b, "indices");
  if (range && list) fail(path, "give either range or indices, not both");
  std::vector<int> ks;
  if (list) {
    if (!list->is_array() || list->empty()) fail(path + ".indices", "expected a non-empty array");
    for (std::size_t i = 0; i < list->size(); ++i) ks.push_back(as_int((*list)[i], path + ".indices[" + std::to_string(i) + "]"));
  } else {
    int lo = 1, hi = K;
    if (range) {
      if (!range->is_array() || range->size() != 2) fail(path + ".range", "expected [first, last]");
      lo = as_int((*range)[0], path + ".range[0]");
      hi = as_int((*range)[1], path + ".range[1]");
    }
    if (lo > hi) fail(path + ".range", "first index exceeds last");
    for (int k = lo; k <= hi; ++k) ks.push_back(k);
  }
  for (int k : ks)
    if (k < 1 || k > K) fail(path, "index " + std::to_string(k) + " outside [1, " + std::to_string(K) + "]");
  std::vector<int> sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail(path + ".indices", "repeated index");
  if (sorted != ks) fail(path + ".indices", "indices must be increasing");
  return ks;
}

BlockKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "gaussian") return BlockKind::Gaussian;
  if (s == "laplace") return BlockKind::Laplace;
  if (s == "box") return BlockKind::Box;
  if (s == "halfspace") return BlockKind::HalfSpace;
  if (s == "binary") return BlockKind::Binary;
  if (s == "polyhedron") return BlockKind::Polyhedron;
  fail(path, "unknown kind '" + s + "'");
}

Signal parse_signal(const std::string& s, const std::string& path) {
  if (s == "u") return Signal::Input;
  if (s == "y") return Signal::Output;
  if (s == "x") return Signal::State;
  if (s == "shift") return Signal::Shift;
  if (s == "y_shifted") return Signal::ShiftedOutput;
  if (s == "row") return Signal::Row;
  fail(path, "unknown signal '" + s + "'");
}

ConstraintBlock parse_block(const std::string& name, const Json& b, const BuiltModel& bm, int K,
                            std::vector<std::string>& warnings) {
  const std::string path = "constraints." + name;
  if (!b.is_object()) fail(path, "expected an object");
  const Json* kind_v = find(b, "kind");
  if (!kind_v || !kind_v->is_string()) fail(path + ".kind", "missing or not a string");
  ConstraintBlock blk;
  blk.name = name;
  blk.kind = parse_kind(kind_v->get<std::string>(), path + ".kind");

  std::set<std::string> allowed = {"kind", "signal", "range", "indices"};
  switch (blk.kind) {
    case BlockKind::Gaussian: allowed.insert({"mean", "variance"}); break;
    case BlockKind::Laplace: allowed.insert({"center", "gamma"}); break;
    case BlockKind::Box: allowed.insert({"lo", "hi", "gamma"}); break;
    case BlockKind::HalfSpace: allowed.insert({"bound", "side", "gamma"}); break;
    case BlockKind::Binary: allowed.insert({"levels"}); break;
    case BlockKind::Polyhedron: allowed.insert({"faces", "gamma", "outputs"}); break;
  }
  if (blk.kind != BlockKind::Polyhedron) allowed.insert({"channel", "shift", "row"});
  check_keys(b, path, allowed);

  const LinearSSM& m = bm.model;
  if (blk.kind == BlockKind::Polyhedron) {
    blk.signal = Signal::OutputVector;
    if (find(b, "signal") && string_or(b, "signal", path, "") != "y") fail(path + ".signal", "polyhedron blocks act on \"y\"");
    if (const Json* o = find(b, "outputs")) {
      if (!o->is_array() || o->empty()) fail(path + ".outputs", "expected a non-empty array");
      for (std::size_t i = 0; i < o->size(); ++i) blk.outputs.push_back(as_int((*o)[i], path + ".outputs"));
    } else {
      for (Eigen::Index i = 0; i < m.p(); ++i) blk.outputs.push_back(static_cast<int>(i));
    }
    for (int o : blk.outputs)
      if (o < 0 || o >= m.p()) fail(path + ".outputs", "output " + std::to_string(o) + " does not exist");
  } else {
    blk.signal = parse_signal(string_or(b, "signal", path, "u"), path + ".signal");
    blk.channel = int_or(b, "channel", path, 0);
    blk.shift = int_or(b, "shift", path, 0);
    auto need = [&](bool ok, const std::string& key, const std::string& what) {
      if (!ok) fail(path + "." + key, what);
    };
    switch (blk.signal) {
      case Signal::Input:
        need(blk.channel >= 0 && blk.channel < bm.shift_base, "channel", "input channel " + std::to_string(blk.channel) + " does not exist");
        break;
      case Signal::Output:
        need(blk.channel >= 0 && blk.channel < m.p(), "channel", "output channel " + std::to_string(blk.channel) + " does not exist");
        break;
      case Signal::State:
        need(blk.channel >= 0 && blk.channel < m.n(), "channel", "state " + std::to_string(blk.channel) + " does not exist");
        break;
      case Signal::Shift:
        need(blk.channel >= 0 && blk.channel < bm.shifts, "channel", "shift channel " + std::to_string(blk.channel) + " does not exist");
        break;
      case Signal::ShiftedOutput:
        need(blk.channel >= 0 && blk.channel < m.p(), "channel", "output channel " + std::to_string(blk.channel) + " does not exist");
        need(blk.shift >= 0 && blk.shift < bm.shifts, "shift", "shift channel " + std::to_string(blk.shift) + " does not exist");
        break;
      case Signal::Row: {
        const Json* r = find(b, "row");
        need(r != nullptr, "row", "missing");
        blk.row = as_vector(*r, path + ".row");
        need(blk.row.size() == m.n(), "row", "expected " + std::to_string(m.n()) + " entries");
        break;
      }
      case Signal::OutputVector: break;
    }
  }

  const std::vector<int> ks = parse_indices(b, path, K);
  const std::size_t n = ks.size();
  auto add = [&](std::size_t i, EntryLaw law) { blk.entries.push_back({ks[i], std::move(law)}); };
  auto checked = [&](const ConstraintPrior& prior, std::size_t i) {
    try {
      validate(prior);
    } catch (const Error& e) {
      throw Error(e.kind(), path + " at k=" + std::to_string(ks[i]) + ": " + detail(e));
    }
    return prior;
  };

  switch (blk.kind) {
    case BlockKind::Gaussian: {
      const auto mean = per_index(b, "mean", n, path, std::nullopt);
      const auto var = per_index(b, "variance", n, path, std::nullopt);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(var[i] > 0.0)) fail(path + ".variance", "must be positive");
        add(i, GaussianMsg{mean[i], var[i]});
      }
      break;
    }
    case BlockKind::Laplace: {
      const auto c = per_index(b, "center", n, path, 0.0);
      const auto g = per_index(b, "gamma", n, path, 1.0);
      for (std::size_t i = 0; i < n; ++i) add(i, checked(LaplaceSpec{c[i], g[i]}, i));
      break;
    }
    case BlockKind::Box: {
      const auto lo = per_index(b, "lo", n, path, std::nullopt);
      const auto hi = per_index(b, "hi", n, path, std::nullopt);
      const auto g = per_index(b, "gamma", n, path, 1.0);
      for (std::size_t i = 0; i < n; ++i) add(i, checked(BoxSpec{lo[i], hi[i], g[i]}, i));
      break;
    }
    case BlockKind::HalfSpace: {
      const auto a = per_index(b, "bound", n, path, std::nullopt);
      const auto g = per_index(b, "gamma", n, path, 1.0);
      const Json* s = find(b, "side");
      if (!s) fail(path + ".side", "missing");
      const Side side = parse_side(*s, path + ".side");
      for (std::size_t i = 0; i < n; ++i) add(i, checked(HalfSpaceSpec{a[i], side, g[i]}, i));
      break;
    }
    case BlockKind::Binary: {
      const Json* lv = find(b, "levels");
      if (!lv || !lv->is_array() || lv->size() != 2) fail(path + ".levels", "expected [low, high]");
      Json pair = Json::object();
      pair["low"] = (*lv)[0];
      pair["high"] = (*lv)[1];
      const auto lo = per_index(pair, "low", n, path + ".levels", std::nullopt);
      const auto hi = per_index(pair, "high", n, path + ".levels", std::nullopt);
      for (std::size_t i = 0; i < n; ++i) add(i, checked(BinarySpec{lo[i], hi[i]}, i));
      break;
    }
    case BlockKind::Polyhedron: {
      const Json* faces = find(b, "faces");
      if (!faces || !faces->is_array() || faces->empty()) fail(path + ".faces", "expected a non-empty array");
      PolyhedronSpec poly;
      poly.gamma = number_or(b, "gamma", path, 1.0);
      for (std::size_t l = 0; l < faces->size(); ++l) {
        const std::string p = path + ".faces[" + std::to_string(l) + "]";
        const Json& f = (*faces)[l];
        check_keys(f, p, {"normal", "offset", "side"});
        if (!find(f, "normal")) fail(p + ".normal", "missing");
        if (!find(f, "side")) fail(p + ".side", "missing");
        const Eigen::VectorXd nrm = as_vector(f["normal"], p + ".normal");
        if (nrm.size() != static_cast<Eigen::Index>(blk.outputs.size()))
          fail(p + ".normal", "expected " + std::to_string(blk.outputs.size()) + " entries");
        poly.normals.push_back(nrm);
        poly.offsets.push_back(required_number(f, "offset", p));
        poly.sides.push_back(parse_side(f["side"], p + ".side"));
      }
      std::vector<std::string> notes;
      try {
        poly = normalized(poly, &notes);
        validate(poly);
      } catch (const Error& e) {
        fail(path, detail(e));
      }
      for (const std::string& note : notes) warnings.push_back(path + ": " + note);
      for (std::size_t i = 0; i < n; ++i) add(i, poly);
      break;
    }
  }
  return blk;
}

SolverSettings parse_solver(const Json& s) {
  const std::string path = "solver";
  check_keys(s, path, {"max_iter", "tol", "objective_tol", "init_variance", "gamma_ramp", "gamma_max", "seed", "jitter"});
  SolverSettings out;
  out.max_iter = int_or(s, "max_iter", path, out.max_iter);
  out.tol = number_or(s, "tol", path, out.tol);
  out.objective_tol = number_or(s, "objective_tol", path, out.objective_tol);
  out.init_variance = number_or(s, "init_variance", path, out.init_variance);
  out.gamma_ramp = number_or(s, "gamma_ramp", path, out.gamma_ramp);
  out.gamma_max = number_or(s, "gamma_max", path, out.gamma_max);
  out.jitter = number_or(s, "jitter", path, out.jitter);
  if (const Json* v = find(s, "seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      fail(path + ".seed", "expected a non-negative integer");
    out.seed = v->get<std::uint64_t>();
  }
  if (out.max_iter < 1) fail(path + ".max_iter", "must be at least 1");
  if (!(out.tol > 0.0)) fail(path + ".tol", "must be positive");
  if (!(out.objective_tol >= 0.0)) fail(path + ".objective_tol", "must be non-negative");
  if (!(out.init_variance > 0.0)) fail(path + ".init_variance", "must be positive");
  if (!(out.gamma_ramp >= 1.0)) fail(path + ".gamma_ramp", "must be at least 1");
  if (!(out.gamma_max > 0.0)) fail(path + ".gamma_max", "must be positive");
  if (!(out.jitter >= 0.0 && out.jitter < 0.5)) fail(path + ".jitter", "must lie in [0, 0.5)");
  return out;
}

}  // namespace

const ConstraintBlock* ScenarioConfig::block(const std::string& block_name) const {
  for (const ConstraintBlock& b : blocks)
    if (b.name == block_name) return &b;
  return nullptr;
}

bool ScenarioConfig::has_binary() const {
  return std::any_of(blocks.begin(), blocks.end(), [](const ConstraintBlock& b) { return b.kind == BlockKind::Binary; });
}

ScenarioConfig parse_scenario(const Json& tree) {
  check_keys(tree, "config", {"name", "description", "horizon", "model", "constraints", "solver"});
  ScenarioConfig cfg;
  cfg.name = string_or(tree, "name", "config", "scenario");
  cfg.description = string_or(tree, "description", "config", "");
  const Json* horizon = find(tree, "horizon");
  if (!horizon) fail("horizon", "missing");
  const int K = as_int(*horizon, "horizon");
  if (K < 1) fail("horizon", "must be at least 1");
  const Json* model = find(tree, "model");
  if (!model) fail("model", "missing");
  BuiltModel bm = parse_model(*model, K);
  cfg.model = bm.model;
  cfg.names = bm.names;
  cfg.shift_base = bm.shift_base;
  cfg.shifts = bm.shifts;
  if (const Json* c = find(tree, "constraints")) {
    if (!c->is_object()) fail("constraints", "expected an object of named blocks");
    for (auto it = c->begin(); it != c->end(); ++it)
      cfg.blocks.push_back(parse_block(it.key(), it.value(), bm, K, cfg.warnings));
  }
  if (const Json* s = find(tree, "solver")) cfg.solver = parse_solver(*s);
  return cfg;
}

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": " << e.what();
    throw Error(ErrorKind::ConfigError, os.str());
  }
}

void apply_override(Json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail(assignment, "override must look like path.to.key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &tree;
  std::string done;
  std::stringstream ss(path);
  std::string seg;
  std::vector<std::string> segs;
  while (std::getline(ss, seg, '.')) segs.push_back(seg);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string& s = segs[i];
    if (s.empty()) fail(path, "empty path segment");
    done += (done.empty() ? "" : ".") + s;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        fail(done, "expected an array index");
      }
      if (idx >= node->size()) fail(done, "array index out of range");
      node = &(*node)[idx];
    } else if (node->is_object() || node->is_null()) {
      node = &(*node)[s];
    } else {
      fail(done, "cannot descend into a scalar");
    }
  }
  *node = value;
}

}  // namespace nuv
