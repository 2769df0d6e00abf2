#pragma once

// JSON and CSV formats. JSON is the round-trip format (shortest decimal
// representation that parses back to the same double); CSV is for plotting.
// Field order is fixed so identical inputs give byte-identical files.

#include "hricci/soliton.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>

namespace hricci {

using Json = nlohmann::ordered_json;

/// A document does not match its schema. path() is a JSON pointer to the
/// offending key.
class ConfigError : public Error {
public:
  ConfigError(std::string path, const std::string &what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string &path() const { return path_; }

private:
  std::string path_;
};

namespace io {

inline std::string join(const std::string &path, const std::string &key) { return path + "/" + key; }

/// Rejects any key not in `allowed`.
inline void check_keys(const Json &j, const std::set<std::string> &allowed, const std::string &path) {
  if (!j.is_object())
    throw ConfigError(path.empty() ? "/" : path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.contains(it.key()))
      throw ConfigError(join(path, it.key()), "unknown key");
}

inline const Json &require(const Json &j, const std::string &key, const std::string &path) {
  if (!j.contains(key))
    throw ConfigError(join(path, key), "missing required key");
  return j.at(key);
}

inline double get_number(const Json &j, const std::string &path) {
  if (!j.is_number())
    throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline long get_integer(const Json &j, const std::string &path) {
  if (!j.is_number_integer())
    throw ConfigError(path, "expected an integer");
  return j.get<long>();
}

inline std::string get_string(const Json &j, const std::string &path) {
  if (!j.is_string())
    throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> get_numbers(const Json &j, const std::string &path) {
  if (!j.is_array())
    throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], path + "/" + std::to_string(i)));
  return out;
}

inline Json to_json(const Matrix &m) { return linalg::row_major(m); }
inline Json to_json(const Vector &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Matrix matrix_from_json(const Json &j, int n, const std::string &path) {
  const auto values = get_numbers(j, path);
  if (static_cast<int>(values.size()) != n * n)
    throw ConfigError(path, "expected " + std::to_string(n * n) + " row-major entries");
  return linalg::from_row_major(values, n);
}

inline LeftInvariantMetric metric_from_json(const Json &j, int n, const std::string &path) {
  try {
    return LeftInvariantMetric(matrix_from_json(j, n, path));
  } catch (const InvalidStateError &e) {
    throw ConfigError(path, e.what());
  }
}

// ---------------------------------------------------------------- geometry

/// { "dim", "brackets": [{"i","j","k","value"}] (i < j, 0-based), "metric", "volume0" }
inline Json geometry_to_json(const StructureConstants &sc, const Matrix &metric, double volume0) {
  Json j;
  j["dim"] = sc.dim();
  Json brackets = Json::array();
  for (int i = 0; i < sc.dim(); ++i)
    for (int jj = i + 1; jj < sc.dim(); ++jj)
      for (int k = 0; k < sc.dim(); ++k)
        if (sc(k, i, jj) != 0.0)
          brackets.push_back(Json{{"i", i}, {"j", jj}, {"k", k}, {"value", sc(k, i, jj)}});
  j["brackets"] = brackets;
  j["metric"] = to_json(metric);
  j["volume0"] = volume0;
  return j;
}

inline StructureConstants brackets_from_json(const Json &j, int n, const std::string &path) {
  if (!j.is_array())
    throw ConfigError(path, "expected an array of bracket entries");
  StructureConstants sc(n);
  for (std::size_t e = 0; e < j.size(); ++e) {
    const std::string p = path + "/" + std::to_string(e);
    check_keys(j[e], {"i", "j", "k", "value"}, p);
    const long i = get_integer(require(j[e], "i", p), join(p, "i"));
    const long jj = get_integer(require(j[e], "j", p), join(p, "j"));
    const long k = get_integer(require(j[e], "k", p), join(p, "k"));
    const double v = get_number(require(j[e], "value", p), join(p, "value"));
    for (auto [idx, key] : {std::pair{i, "i"}, {jj, "j"}, {k, "k"}})
      if (idx < 0 || idx >= n)
        throw ConfigError(join(p, key), "index out of range [0, " + std::to_string(n) + ")");
    if (i >= jj)
      throw ConfigError(p, "bracket entries need i < j (antisymmetry is implied)");
    sc.set_bracket(static_cast<int>(i), static_cast<int>(jj), static_cast<int>(k), v);
  }
  return sc;
}

/// Parses the inline geometry document. Bracket validation failures (Jacobi)
/// are reported against the brackets path.
inline Geometry geometry_from_json(const Json &j, const std::string &path,
                                   const std::set<std::string> &extra_keys = {}) {
  std::set<std::string> allowed{"dim", "brackets", "metric", "volume0"};
  allowed.insert(extra_keys.begin(), extra_keys.end());
  check_keys(j, allowed, path);
  const long n = get_integer(require(j, "dim", path), join(path, "dim"));
  if (n < 1 || n > 16)
    throw ConfigError(join(path, "dim"), "dimension must be in [1, 16]");
  const int dim = static_cast<int>(n);
  StructureConstants sc = brackets_from_json(require(j, "brackets", path), dim, join(path, "brackets"));
  const auto rep = validate(sc);
  if (!rep.valid())
    throw ConfigError(join(path, "brackets"), rep.errors.front());
  LeftInvariantMetric g = j.contains("metric")
                              ? metric_from_json(j.at("metric"), dim, join(path, "metric"))
                              : LeftInvariantMetric(Matrix::Identity(dim, dim));
  double v0 = 1.0;
  if (j.contains("volume0")) {
    v0 = get_number(j.at("volume0"), join(path, "volume0"));
    if (!(v0 > 0.0))
      throw ConfigError(join(path, "volume0"), "volume must be positive");
  }
  return Geometry{"custom", std::move(sc), std::move(g), v0, 1.0};
}

// -------------------------------------------------------------- trajectory

inline Json trajectory_to_json(const Trajectory &traj) {
  Json j;
  j["schema"] = 1;
  j["kind"] = to_string(traj.kind);
  j["termination"] = to_string(traj.termination);
  j["rel_tol"] = traj.rel_tol;
  j["geometry"] = geometry_to_json(traj.sc, traj.g0, traj.volume0);
  Json samples = Json::array();
  for (const auto &p : traj.points) {
    Json s;
    s["t"] = p.state.t;
    s["g"] = to_json(p.state.g.matrix());
    s["V"] = p.monitor.V;
    s["R"] = p.monitor.R;
    s["ricci"] = to_json(p.curvature.ricci);
    s["ricci_eigs"] = to_json(p.curvature.ricci_eigs);
    s["einstein_dev"] = p.monitor.einstein_dev;
    s["ric2"] = p.monitor.ric2;
    s["RV2n"] = p.monitor.RV2n;
    s["perelman_lambda"] = p.monitor.perelman_lambda;
    samples.push_back(std::move(s));
  }
  j["samples"] = std::move(samples);
  return j;
}

/// Rebuilds a trajectory from stored values without touching the curvature,
/// so an audit of the result checks the file's own numbers. RV2n and
/// perelman_lambda are derived from R and V on load.
inline Trajectory trajectory_from_json(const Json &j) {
  check_keys(j, {"schema", "kind", "termination", "rel_tol", "geometry", "samples"}, "");
  if (get_integer(require(j, "schema", ""), "/schema") != 1)
    throw ConfigError("/schema", "unsupported schema version");
  Trajectory traj;
  try {
    traj.kind = parse_flow_kind(get_string(require(j, "kind", ""), "/kind"));
    traj.termination = parse_termination(get_string(require(j, "termination", ""), "/termination"));
  } catch (const InvalidStateError &e) {
    throw ConfigError("/kind", e.what());
  }
  traj.rel_tol = get_number(require(j, "rel_tol", ""), "/rel_tol");
  const Geometry geo = geometry_from_json(require(j, "geometry", ""), "/geometry");
  traj.sc = geo.sc;
  traj.g0 = geo.metric.matrix();
  traj.volume0 = geo.volume0;
  const int n = geo.sc.dim();

  const Json &samples = require(j, "samples", "");
  if (!samples.is_array())
    throw ConfigError("/samples", "expected an array");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::string p = "/samples/" + std::to_string(k);
    const Json &s = samples[k];
    check_keys(s, {"t", "g", "V", "R", "ricci", "ricci_eigs", "einstein_dev", "ric2", "RV2n",
                   "perelman_lambda"},
               p);
    CurvatureData cd;
    cd.ricci = matrix_from_json(require(s, "ricci", p), n, join(p, "ricci"));
    const auto eigs = get_numbers(require(s, "ricci_eigs", p), join(p, "ricci_eigs"));
    cd.ricci_eigs = Eigen::Map<const Vector>(eigs.data(), static_cast<Eigen::Index>(eigs.size()));
    cd.scalar = get_number(require(s, "R", p), join(p, "R"));
    cd.einstein_dev = get_number(require(s, "einstein_dev", p), join(p, "einstein_dev"));
    cd.ric2 = get_number(require(s, "ric2", p), join(p, "ric2"));
    const double t = get_number(require(s, "t", p), join(p, "t"));
    const double v = get_number(require(s, "V", p), join(p, "V"));
    require(s, "RV2n", p);
    require(s, "perelman_lambda", p);
    const MonitorSample m = make_monitor_sample(t, cd, v);
    LeftInvariantMetric g = metric_from_json(require(s, "g", p), n, join(p, "g"));
    traj.points.push_back({FlowState{m.t, std::move(g), m.V, traj.kind}, std::move(cd), m});
  }
  return traj;
}

/// Columns t, g_ij (upper triangle), V, R, ricci_eig_1..n, einstein_dev,
/// RV2n; the termination reason follows as a trailing comment line.
inline std::string trajectory_to_csv(const Trajectory &traj) {
  const int n = traj.dim();
  std::ostringstream os;
  os << std::setprecision(17);
  os << "t";
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      os << ",g_" << i << j;
  os << ",V,R";
  for (int i = 1; i <= n; ++i)
    os << ",ricci_eig_" << i;
  os << ",einstein_dev,RV2n\n";
  for (const auto &p : traj.points) {
    os << p.state.t;
    const Matrix &g = p.state.g.matrix();
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        os << ',' << g(i, j);
    os << ',' << p.monitor.V << ',' << p.monitor.R;
    for (int i = 0; i < n; ++i)
      os << ',' << p.curvature.ricci_eigs(i);
    os << ',' << p.monitor.einstein_dev << ',' << p.monitor.RV2n << '\n';
  }
  os << "# termination=" << to_string(traj.termination) << '\n';
  return os.str();
}

// ---------------------------------------------------------------- verdicts

inline Json to_json(const MonotonicityVerdict &v) {
  return Json{{"quantity", to_string(v.quantity)},
              {"monotone", v.monotone},
              {"worst_violation", v.worst_violation},
              {"strictness", v.strictness},
              {"einstein_consistent", v.einstein_consistent}};
}

inline Json to_json(const LemmaReport &r) {
  return Json{{"lemma", r.lemma},
              {"max_relative_residual", r.max_relative_residual},
              {"worst_time", r.worst_time},
              {"step_sq", r.step_sq},
              {"denominator_floor", r.denominator_floor}};
}

inline Json to_json(const SolitonReport &r) {
  return Json{{"epsilon", r.epsilon},
              {"D", to_json(r.D)},
              {"residual", r.residual},
              {"relative_residual", r.relative_residual},
              {"lie_derivative_norm", r.lie_derivative_norm},
              {"einstein_dev", r.einstein_dev},
              {"derivation_dim", r.derivation_dim},
              {"classification", to_string(r.classification)},
              {"type", to_string(r.type)},
              {"sign_convention", "shrinking: epsilon < 0, expanding: epsilon > 0"}};
}

inline Json to_json(const BreatherScanResult &r) {
  Json cands = Json::array();
  for (const auto &c : r.candidates)
    cands.push_back(Json{{"t", c.t}, {"alpha", c.alpha}, {"distance", c.distance}});
  return Json{{"verdict", to_string(r.verdict)},
              {"min_distance", r.min_distance},
              {"samples_scanned", r.samples_scanned},
              {"candidates", cands}};
}

// -------------------------------------------------------------------- files

/// Writes via a temporary file and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out)
      throw Error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string dump(const Json &j) { return j.dump(2) + "\n"; }

inline Json read_json_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError("/", std::string("malformed JSON in ") + path.string() + ": " + e.what());
  }
}

} // namespace io
} // namespace hricci
