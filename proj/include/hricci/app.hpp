#pragma once

// Scenario configuration and the four batch commands. Each command returns a
// process exit code: 0 success, 1 usage/config/runtime error or failed
// invariant, 2 integration stopped early by a guard.

#include "hricci/io.hpp"
#include "hricci/monitors.hpp"

#include <ostream>

namespace hricci::app {

namespace fs = std::filesystem;

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_guard = 2;

inline const std::set<std::string> &monitor_names() {
  static const std::set<std::string> names{"lemma", "monotone", "volume_law", "gauge", "breather"};
  return names;
}

struct Thresholds {
  SolitonThresholds soliton;
  double lemma_tol = 1e-5;
  double volume_law_tol = 1e-4;
  double volume_drift_tol = 1e-6;
  double gauge_tol = 1e-5;
  double breather_tol = 1e-6;
  /// Breather candidates are only sought past this fraction of the run.
  double breather_t_min_fraction = 0.05;
  /// Stored R, einstein_dev, |Ric|^2 and V against values recomputed from g.
  double consistency_tol = 1e-12;
  double scaling_tol = 1e-12;
  double variation_tol = 1e-12;
};

struct SpectrumConfig {
  spectral::SpectrumModel model;
  double alpha = 2.0;
};

struct Scenario {
  Geometry geometry = preset("abelian3");
  FlowKind flow = FlowKind::unnormalized;
  IntegratorConfig integrator;
  double sample_stride = 1.25e-4;
  std::set<std::string> monitors = monitor_names();
  Thresholds thresholds;
  std::optional<SpectrumConfig> spectrum;
  fs::path out_dir = "out";
  std::string stem;
};

/// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::string> preset;
  std::optional<double> t_end;
  std::optional<FlowKind> flow;
  std::optional<fs::path> out_dir;
};

namespace detail {

inline Geometry parse_geometry(const Json &j, const std::string &path) {
  if (!j.is_object())
    throw ConfigError(path, "expected an object");
  if (j.contains("preset") && j.at("preset") != "custom") {
    io::check_keys(j, {"preset", "params", "metric", "volume0"}, path);
    const std::string name = io::get_string(j.at("preset"), io::join(path, "preset"));
    std::vector<double> params;
    if (j.contains("params"))
      params = io::get_numbers(j.at("params"), io::join(path, "params"));
    Geometry geo = [&] {
      try {
        return preset(name, params);
      } catch (const InvalidStateError &e) {
        throw ConfigError(io::join(path, j.contains("params") ? "params" : "preset"), e.what());
      }
    }();
    if (j.contains("metric"))
      geo.metric = io::metric_from_json(j.at("metric"), geo.sc.dim(), io::join(path, "metric"));
    if (j.contains("volume0")) {
      geo.volume0 = io::get_number(j.at("volume0"), io::join(path, "volume0"));
      if (!(geo.volume0 > 0.0))
        throw ConfigError(io::join(path, "volume0"), "volume must be positive");
    }
    return geo;
  }
  Geometry geo = io::geometry_from_json(j, path, {"preset", "name"});
  if (j.contains("name"))
    geo.name = io::get_string(j.at("name"), io::join(path, "name"));
  return geo;
}

inline void parse_integrator(const Json &j, IntegratorConfig &cfg, bool &t_end_set) {
  const std::string path = "/integrator";
  io::check_keys(j,
                 {"method", "step", "rel_tol", "abs_tol", "t_end", "max_steps", "min_eig_stop",
                  "ricci_ceiling"},
                 path);
  auto num = [&](const char *key, double &dst) {
    if (j.contains(key))
      dst = io::get_number(j.at(key), io::join(path, key));
  };
  if (j.contains("method")) {
    try {
      cfg.method = parse_method(io::get_string(j.at("method"), path + "/method"));
    } catch (const InvalidStateError &e) {
      throw ConfigError(path + "/method", e.what());
    }
  }
  num("step", cfg.step);
  num("rel_tol", cfg.rel_tol);
  num("abs_tol", cfg.abs_tol);
  num("min_eig_stop", cfg.min_eig_stop);
  num("ricci_ceiling", cfg.ricci_ceiling);
  if (j.contains("t_end")) {
    num("t_end", cfg.t_end);
    t_end_set = true;
  }
  if (j.contains("max_steps"))
    cfg.max_steps = io::get_integer(j.at("max_steps"), path + "/max_steps");
}

inline void parse_thresholds(const Json &j, Thresholds &thr) {
  const std::string path = "/thresholds";
  io::check_keys(j,
                 {"einstein_dev", "soliton_residual", "steady_band", "rank_cutoff", "lemma_tol",
                  "volume_law_tol", "volume_drift_tol", "gauge_tol", "breather_tol",
                  "breather_t_min_fraction", "consistency_tol", "scaling_tol", "variation_tol"},
                 path);
  const std::pair<const char *, double *> fields[] = {
      {"einstein_dev", &thr.soliton.einstein_dev},
      {"soliton_residual", &thr.soliton.soliton_residual},
      {"steady_band", &thr.soliton.steady_band},
      {"rank_cutoff", &thr.soliton.rank_cutoff},
      {"lemma_tol", &thr.lemma_tol},
      {"volume_law_tol", &thr.volume_law_tol},
      {"volume_drift_tol", &thr.volume_drift_tol},
      {"gauge_tol", &thr.gauge_tol},
      {"breather_tol", &thr.breather_tol},
      {"breather_t_min_fraction", &thr.breather_t_min_fraction},
      {"consistency_tol", &thr.consistency_tol},
      {"scaling_tol", &thr.scaling_tol},
      {"variation_tol", &thr.variation_tol},
  };
  for (auto [key, dst] : fields)
    if (j.contains(key)) {
      *dst = io::get_number(j.at(key), io::join(path, key));
      if (!(*dst >= 0.0))
        throw ConfigError(io::join(path, key), "threshold must be >= 0");
    }
  if (thr.breather_t_min_fraction >= 1.0)
    throw ConfigError(path + "/breather_t_min_fraction", "must be < 1");
}

inline SpectrumConfig parse_spectrum(const Json &j, int geometry_dim) {
  const std::string path = "/spectrum";
  if (!j.is_object())
    throw ConfigError(path, "expected an object");
  const std::string model =
      io::get_string(io::require(j, "model", path), path + "/model");
  SpectrumConfig cfg;
  auto int_field = [&](const char *key, int fallback) {
    if (!j.contains(key))
      return fallback;
    return static_cast<int>(io::get_integer(j.at(key), io::join(path, key)));
  };
  if (j.contains("alpha")) {
    cfg.alpha = io::get_number(j.at("alpha"), path + "/alpha");
    if (!(cfg.alpha > 0.0))
      throw ConfigError(path + "/alpha", "scale factor must be positive");
  }
  if (model == "torus") {
    io::check_keys(j, {"model", "cutoff", "metric", "dim", "alpha"}, path);
    const int n = int_field("dim", geometry_dim);
    if (n < 1)
      throw ConfigError(path + "/dim", "dimension must be >= 1");
    spectral::FlatTorus t;
    t.cutoff = int_field("cutoff", 3);
    if (t.cutoff < 1)
      throw ConfigError(path + "/cutoff", "cutoff must be >= 1");
    t.metric = j.contains("metric")
                   ? io::metric_from_json(j.at("metric"), n, path + "/metric").matrix()
                   : Matrix(Matrix::Identity(n, n));
    cfg.model = t;
  } else if (model == "sphere") {
    io::check_keys(j, {"model", "n", "radius", "k_max", "alpha"}, path);
    spectral::RoundSphere s;
    s.n = int_field("n", 2);
    s.k_max = int_field("k_max", 4);
    if (j.contains("radius"))
      s.radius = io::get_number(j.at("radius"), path + "/radius");
    if (s.n < 2)
      throw ConfigError(path + "/n", "sphere dimension must be >= 2");
    if (s.k_max < 0)
      throw ConfigError(path + "/k_max", "k_max must be >= 0");
    if (!(s.radius > 0.0))
      throw ConfigError(path + "/radius", "radius must be positive");
    cfg.model = s;
  } else {
    throw ConfigError(path + "/model", "unknown model '" + model + "' (torus, sphere)");
  }
  return cfg;
}

} // namespace detail

/// Validates the whole document before anything is computed.
inline Scenario parse_scenario(const Json &j, const Overrides &ov = {}) {
  io::check_keys(j,
                 {"schema", "geometry", "flow", "integrator", "t_end", "sample_stride", "monitors",
                  "thresholds", "spectrum", "output"},
                 "");
  if (io::get_integer(io::require(j, "schema", ""), "/schema") != 1)
    throw ConfigError("/schema", "unsupported schema version (expected 1)");

  Scenario sc;
  if (ov.preset) {
    try {
      sc.geometry = preset(*ov.preset);
    } catch (const InvalidStateError &e) {
      throw ConfigError("--preset", e.what());
    }
  } else {
    sc.geometry = detail::parse_geometry(io::require(j, "geometry", ""), "/geometry");
  }

  if (j.contains("flow")) {
    try {
      sc.flow = parse_flow_kind(io::get_string(j.at("flow"), "/flow"));
    } catch (const InvalidStateError &e) {
      throw ConfigError("/flow", e.what());
    }
  }
  if (ov.flow)
    sc.flow = *ov.flow;

  bool t_end_set = false;
  if (j.contains("integrator"))
    detail::parse_integrator(j.at("integrator"), sc.integrator, t_end_set);
  if (j.contains("t_end")) {
    sc.integrator.t_end = io::get_number(j.at("t_end"), "/t_end");
    if (!(sc.integrator.t_end > 0.0))
      throw ConfigError("/t_end", "t_end must be positive");
    t_end_set = true;
  }
  if (ov.t_end) {
    sc.integrator.t_end = *ov.t_end;
    t_end_set = true;
  }
  if (!t_end_set)
    sc.integrator.t_end = sc.geometry.suggested_t_end;
  try {
    sc.integrator.validate();
  } catch (const InvalidStateError &e) {
    throw ConfigError("/integrator", e.what());
  }

  if (j.contains("sample_stride")) {
    sc.sample_stride = io::get_number(j.at("sample_stride"), "/sample_stride");
    if (!(sc.sample_stride >= 0.0))
      throw ConfigError("/sample_stride", "stride must be >= 0 (0 records every step)");
  }

  if (j.contains("monitors")) {
    const Json &m = j.at("monitors");
    if (!m.is_array())
      throw ConfigError("/monitors", "expected an array of monitor names");
    sc.monitors.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string p = "/monitors/" + std::to_string(i);
      const std::string name = io::get_string(m[i], p);
      if (!monitor_names().contains(name))
        throw ConfigError(p, "unknown monitor '" + name + "'");
      sc.monitors.insert(name);
    }
  }

  if (j.contains("thresholds"))
    detail::parse_thresholds(j.at("thresholds"), sc.thresholds);
  if (j.contains("spectrum"))
    sc.spectrum = detail::parse_spectrum(j.at("spectrum"), sc.geometry.sc.dim());

  sc.stem = sc.geometry.name;
  if (j.contains("output")) {
    const Json &o = j.at("output");
    io::check_keys(o, {"dir", "stem"}, "/output");
    if (o.contains("dir"))
      sc.out_dir = io::get_string(o.at("dir"), "/output/dir");
    if (o.contains("stem"))
      sc.stem = io::get_string(o.at("stem"), "/output/stem");
  }
  if (ov.out_dir)
    sc.out_dir = *ov.out_dir;
  if (sc.stem.empty())
    throw ConfigError("/output/stem", "output stem must not be empty");
  return sc;
}

inline Scenario load_scenario(const fs::path &path, const Overrides &ov = {}) {
  return parse_scenario(io::read_json_file(path), ov);
}

// -------------------------------------------------------------------- audit

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  Json details = Json::object();
};

struct AuditReport {
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.passed; });
  }
  std::vector<std::string> failed() const {
    std::vector<std::string> out;
    for (const auto &c : checks)
      if (!c.passed)
        out.push_back(c.name);
    return out;
  }
};

inline Json to_json(const Check &c) {
  return Json{{"name", c.name},
              {"passed", c.passed},
              {"value", c.value},
              {"tolerance", c.tolerance},
              {"details", c.details}};
}

inline Json to_json(const AuditReport &r) {
  Json checks = Json::array();
  for (const auto &c : r.checks)
    checks.push_back(to_json(c));
  return Json{{"passed", r.passed()}, {"checks", checks}};
}

namespace detail {

inline Check failed_check(std::string name, const std::exception &e) {
  Check c;
  c.name = std::move(name);
  c.value = std::numeric_limits<double>::infinity();
  c.details = Json{{"error", e.what()}};
  return c;
}

/// Recomputes curvature and volume from each stored metric.
inline Check sample_consistency(const Trajectory &traj, double tol) {
  Check c{"sample_consistency", true, 0.0, tol, {}};
  const LeftInvariantMetric g0(traj.g0);
  std::size_t worst = 0;
  std::string field;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto &p = traj.points[k];
    const CurvatureData cd = curvature(traj.sc, p.state.g);
    const double v = volume_of(p.state.g, g0, traj.volume0);
    const std::pair<const char *, std::pair<double, double>> pairs[] = {
        {"R", {p.monitor.R, cd.scalar}},
        {"einstein_dev", {p.monitor.einstein_dev, cd.einstein_dev}},
        {"ric2", {p.monitor.ric2, cd.ric2}},
        {"V", {p.monitor.V, v}},
    };
    for (auto [name, vals] : pairs) {
      const double scale = std::max({1.0, std::abs(vals.second), std::sqrt(cd.ric2)});
      double d = std::abs(vals.first - vals.second) / scale;
      if (std::isnan(d))
        d = std::numeric_limits<double>::infinity();
      if (d > c.value) {
        c.value = d;
        worst = k;
        field = name;
      }
    }
  }
  c.passed = c.value <= tol;
  c.details = Json{{"worst_index", worst}, {"worst_field", field}};
  return c;
}

inline Check lemma_check(const Trajectory &traj, double tol) {
  const bool normalized = traj.kind == FlowKind::normalized;
  const std::string name = normalized ? "lemma1" : "lemma2";
  try {
    const LemmaReport rep = normalized ? lemma1_check(traj) : lemma2_check(traj);
    return {name, rep.passed(tol), rep.max_relative_residual, tol, io::to_json(rep)};
  } catch (const Error &e) {
    return failed_check(name, e);
  }
}

inline Check monotone_check(const Trajectory &traj) {
  const MonotoneQuantity q = traj.kind == FlowKind::normalized ? MonotoneQuantity::R_normalized
                                                               : MonotoneQuantity::RV2n;
  const std::string name = "monotone_" + to_string(q);
  try {
    const MonotonicityVerdict v = monotone_assert(traj, q);
    Json d = io::to_json(v);
    d["initial_value"] = v.initial_value;
    double q_max = 0.0;
    for (const auto &p : traj.points)
      q_max = std::max(q_max, std::abs(q == MonotoneQuantity::RV2n ? p.monitor.RV2n : p.monitor.R));
    return {name, v.passed(), std::max(0.0, v.worst_violation),
            MonotoneOptions{}.tol_factor * traj.rel_tol * q_max, d};
  } catch (const Error &e) {
    return failed_check(name, e);
  }
}

inline Check breather_check(const Trajectory &traj, const Thresholds &thr) {
  try {
    const double t_min = thr.breather_t_min_fraction * traj.t_final();
    const BreatherScanResult r =
        breather_scan(traj, LeftInvariantMetric(traj.g0), thr.breather_tol, t_min, thr.soliton);
    Json d = io::to_json(r);
    d["t_min"] = t_min;
    const auto pre = breather_precondition(traj.points.front().monitor);
    d["precondition"] = to_string(pre.classification);
    d["precondition_margin"] = pre.margin;
    return {"breather_scan", r.verdict != BreatherVerdict::violation_flag, r.min_distance,
            thr.breather_tol, d};
  } catch (const Error &e) {
    return failed_check("breather_scan", e);
  }
}

} // namespace detail

/// Re-audits a trajectory using only its stored samples.
inline AuditReport audit_trajectory(const Trajectory &traj, const Thresholds &thr,
                                    const std::set<std::string> &monitors = monitor_names()) {
  if (traj.points.empty())
    throw InvalidStateError("trajectory has no samples");
  AuditReport rep;
  rep.checks.push_back(detail::sample_consistency(traj, thr.consistency_tol));
  if (monitors.contains("lemma"))
    rep.checks.push_back(detail::lemma_check(traj, thr.lemma_tol));
  if (monitors.contains("monotone"))
    rep.checks.push_back(detail::monotone_check(traj));
  if (monitors.contains("volume_law")) {
    if (traj.kind == FlowKind::unnormalized) {
      try {
        const double r = volume_law_residual(traj);
        rep.checks.push_back({"volume_law", r < thr.volume_law_tol, r, thr.volume_law_tol, {}});
      } catch (const Error &e) {
        rep.checks.push_back(detail::failed_check("volume_law", e));
      }
    } else {
      const double d = volume_drift(traj);
      rep.checks.push_back({"volume_drift", d < thr.volume_drift_tol, d, thr.volume_drift_tol, {}});
    }
  }
  if (monitors.contains("breather") && traj.kind == FlowKind::unnormalized)
    rep.checks.push_back(detail::breather_check(traj, thr));
  return rep;
}

/// Largest relative entrywise gap between the gauge transform of an
/// unnormalized run and a normalized integration sampled at the same
/// reparametrized times.
inline Check gauge_consistency(const Trajectory &unnormalized, const IntegratorConfig &cfg,
                               double tol) {
  try {
    const Trajectory mapped = gauge_transform(unnormalized);
    std::vector<double> dense;
    for (const auto &p : mapped.points)
      if (p.state.t > 0.0)
        dense.push_back(p.state.t);
    if (dense.empty())
      throw InvalidStateError("gauge check needs samples past t = 0");
    IntegratorConfig c = cfg;
    c.t_end = dense.back();
    const Trajectory direct =
        integrate(unnormalized.sc, LeftInvariantMetric(unnormalized.g0), unnormalized.volume0,
                  FlowKind::normalized, c, Sampling{0.0, dense});
    const auto times = direct.times();

    Check chk{"gauge_consistency", true, 0.0, tol, {}};
    double worst_t = 0.0;
    std::size_t matched = 0;
    for (const auto &p : mapped.points) {
      const auto it = std::lower_bound(times.begin(), times.end(), p.state.t);
      if (it == times.end() || *it != p.state.t)
        continue;
      ++matched;
      const Matrix &a = p.state.g.matrix();
      const Matrix &b = direct.points[static_cast<std::size_t>(it - times.begin())].state.g.matrix();
      const double d = (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
      if (d > chk.value) {
        chk.value = d;
        worst_t = p.state.t;
      }
    }
    chk.passed = chk.value < tol && matched == mapped.size();
    chk.details = Json{{"matched_samples", matched},
                       {"samples", mapped.size()},
                       {"worst_time", worst_t},
                       {"normalized_termination", to_string(direct.termination)}};
    return chk;
  } catch (const Error &e) {
    return detail::failed_check("gauge_consistency", e);
  }
}

// ----------------------------------------------------------------- commands

namespace detail {

inline Trajectory run_flow(const Scenario &s, FlowKind kind) {
  return integrate(s.geometry.sc, s.geometry.metric, s.geometry.volume0, kind, s.integrator,
                   Sampling{s.sample_stride, {}});
}

inline fs::path output_path(const Scenario &s, const std::string &suffix) {
  return s.out_dir / (s.stem + suffix);
}

inline void print_checks(std::ostream &out, const std::string &label, const AuditReport &rep) {
  for (const auto &c : rep.checks)
    out << (c.passed ? "PASS " : "FAIL ") << label << ' ' << c.name << " value=" << c.value
        << " tol=" << c.tolerance << '\n';
}

inline void write_trajectory(const Scenario &s, const Trajectory &traj) {
  const std::string base = "_" + to_string(traj.kind);
  io::write_file_atomic(output_path(s, base + ".json"), io::dump(io::trajectory_to_json(traj)));
  io::write_file_atomic(output_path(s, base + ".csv"), io::trajectory_to_csv(traj));
}

} // namespace detail

inline int run_simulate(const Scenario &s, std::ostream &out) {
  const Trajectory traj = detail::run_flow(s, s.flow);
  detail::write_trajectory(s, traj);
  const auto rv = traj.series([](const TrajectoryPoint &p) { return p.monitor.RV2n; });
  const auto [lo, hi] = std::minmax_element(rv.begin(), rv.end());
  out << std::setprecision(10);
  out << "geometry:     " << s.geometry.name << '\n'
      << "flow:         " << to_string(traj.kind) << '\n'
      << "termination:  " << to_string(traj.termination) << '\n'
      << "t_final:      " << traj.t_final() << '\n'
      << "samples:      " << traj.size() << '\n'
      << "final R:      " << traj.points.back().monitor.R << '\n'
      << "RV^(2/n):     [" << *lo << ", " << *hi << "]\n";
  switch (traj.termination) {
  case Termination::reached_t_end:
    return exit_ok;
  case Termination::spd_guard:
  case Termination::curvature_blowup:
    return exit_guard;
  default:
    return exit_error;
  }
}

/// Integrates both flows, audits each, checks the gauge map between them and
/// writes the trajectories plus a verdict bundle.
inline int run_verify(const Scenario &s, std::ostream &out) {
  const Trajectory un = detail::run_flow(s, FlowKind::unnormalized);
  const Trajectory no = detail::run_flow(s, FlowKind::normalized);
  detail::write_trajectory(s, un);
  detail::write_trajectory(s, no);

  const AuditReport a_un = audit_trajectory(un, s.thresholds, s.monitors);
  const AuditReport a_no = audit_trajectory(no, s.thresholds, s.monitors);
  AuditReport a_gauge;
  if (s.monitors.contains("gauge"))
    a_gauge.checks.push_back(gauge_consistency(un, s.integrator, s.thresholds.gauge_tol));

  const bool ok = a_un.passed() && a_no.passed() && a_gauge.passed();
  Json bundle;
  bundle["schema"] = 1;
  bundle["geometry"] = s.geometry.name;
  bundle["passed"] = ok;
  bundle["trajectories"] = Json{{"unnormalized", Json{{"termination", to_string(un.termination)},
                                                      {"audit", to_json(a_un)}}},
                                {"normalized", Json{{"termination", to_string(no.termination)},
                                                    {"audit", to_json(a_no)}}}};
  bundle["gauge"] = to_json(a_gauge);
  io::write_file_atomic(detail::output_path(s, "_verdicts.json"), io::dump(bundle));

  out << std::setprecision(6);
  detail::print_checks(out, "unnormalized", a_un);
  detail::print_checks(out, "normalized", a_no);
  detail::print_checks(out, "both", a_gauge);
  if (ok) {
    out << "verify: all invariants hold\n";
    return exit_ok;
  }
  std::vector<std::string> failed;
  for (const AuditReport *r : std::array<const AuditReport *, 3>{&a_un, &a_no, &a_gauge})
    for (const auto &n : r->failed())
      failed.push_back(n);
  out << "verify: FAILED invariants:";
  for (const auto &n : failed)
    out << ' ' << n;
  out << '\n';
  return exit_error;
}

/// Audits a stored trajectory without integrating anything.
inline int run_verify_offline(const fs::path &trajectory_json, const Thresholds &thr,
                              const std::set<std::string> &monitors, const fs::path &out_dir,
                              std::ostream &out) {
  const Trajectory traj = io::trajectory_from_json(io::read_json_file(trajectory_json));
  const AuditReport rep = audit_trajectory(traj, thr, monitors);
  Json j{{"schema", 1},
         {"source", trajectory_json.filename().string()},
         {"termination", to_string(traj.termination)},
         {"audit", to_json(rep)}};
  io::write_file_atomic(out_dir / (trajectory_json.stem().string() + "_offline_verdicts.json"),
                        io::dump(j));
  out << std::setprecision(6);
  detail::print_checks(out, to_string(traj.kind), rep);
  if (rep.passed()) {
    out << "verify: all invariants hold\n";
    return exit_ok;
  }
  out << "verify: FAILED invariants:";
  for (const auto &n : rep.failed())
    out << ' ' << n;
  out << '\n';
  return exit_error;
}

inline int run_detect(const Scenario &s, std::ostream &out) {
  const SolitonReport rep = soliton_fit(s.geometry.sc, s.geometry.metric, s.thresholds.soliton);
  io::write_file_atomic(detail::output_path(s, "_soliton.json"), io::dump(io::to_json(rep)));

  out << std::setprecision(10);
  out << "geometry            " << s.geometry.name << '\n'
      << "classification      " << to_string(rep.classification) << '\n'
      << "type                " << to_string(rep.type) << '\n'
      << "epsilon             " << rep.epsilon << '\n'
      << "residual            " << rep.residual << '\n'
      << "relative_residual   " << rep.relative_residual << '\n'
      << "|L_D g|             " << rep.lie_derivative_norm << '\n'
      << "einstein_dev        " << rep.einstein_dev << '\n'
      << "derivation_dim      " << rep.derivation_dim << '\n';

  if (s.monitors.contains("breather")) {
    const Trajectory traj = detail::run_flow(s, FlowKind::unnormalized);
    const Check c = detail::breather_check(traj, s.thresholds);
    io::write_file_atomic(detail::output_path(s, "_breather.json"), io::dump(c.details));
    out << "breather_verdict    "
        << (c.details.contains("verdict") ? c.details["verdict"].get<std::string>() : "error")
        << '\n'
        << "breather_min_dist   " << c.value << '\n';
    if (c.details.contains("precondition"))
      out << "precondition        " << c.details["precondition"].get<std::string>() << '\n';
    if (c.details.contains("error")) {
      out << "breather scan failed: " << c.details["error"].get<std::string>() << '\n';
      return exit_error;
    }
  }
  return exit_ok;
}

inline int run_spectrum(const Scenario &s, std::ostream &out) {
  if (!s.spectrum)
    throw ConfigError("/spectrum", "spectrum needs a model section");
  const SpectrumConfig &cfg = *s.spectrum;
  const spectral::Spectrum spec = spectral::spectrum(cfg.model);

  AuditReport checks;
  const double dev = spectral::scaling_law_check(cfg.model, cfg.alpha);
  checks.checks.push_back({"scaling_law", dev <= s.thresholds.scaling_tol, dev,
                           s.thresholds.scaling_tol, Json{{"alpha", cfg.alpha}}});
  Json model;
  if (const auto *t = std::get_if<spectral::FlatTorus>(&cfg.model)) {
    model = Json{{"model", "torus"}, {"cutoff", t->cutoff}, {"metric", io::to_json(t->metric)}};
  } else {
    const auto &sp = std::get<spectral::RoundSphere>(cfg.model);
    model = Json{{"model", "sphere"}, {"n", sp.n}, {"radius", sp.radius}, {"k_max", sp.k_max}};
    const auto vc = spectral::eigenvalue_variation_check(sp.n);
    checks.checks.push_back({"eigenvalue_variation", vc.relative_gap <= s.thresholds.variation_tol,
                             vc.relative_gap, s.thresholds.variation_tol,
                             Json{{"closed_form", vc.closed_form}, {"formula", vc.formula}}});
  }

  std::ostringstream csv;
  csv << std::setprecision(17) << "eigenvalue,multiplicity\n";
  Json eigs = Json::array();
  for (const auto &e : spec.eigenvalues) {
    csv << e.value << ',' << e.multiplicity << '\n';
    eigs.push_back(Json{{"value", e.value}, {"multiplicity", e.multiplicity}});
  }
  csv << "# reliable_below=" << spec.reliable_below << '\n';
  io::write_file_atomic(detail::output_path(s, "_spectrum.csv"), csv.str());

  Json j{{"schema", 1},
         {"model", model},
         {"reliable_below", std::isfinite(spec.reliable_below) ? Json(spec.reliable_below)
                                                               : Json("inf")},
         {"eigenvalues", eigs},
         {"checks", to_json(checks)}};
  io::write_file_atomic(detail::output_path(s, "_spectrum.json"), io::dump(j));

  out << std::setprecision(6) << "eigenvalues: " << spec.eigenvalues.size() << " distinct\n";
  detail::print_checks(out, "spectrum", checks);
  return checks.passed() ? exit_ok : exit_error;
}

} // namespace hricci::app
