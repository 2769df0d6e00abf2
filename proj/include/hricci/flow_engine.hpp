#pragma once

// Ricci flow and normalized Ricci flow of a left-invariant metric, integrated
// as an ODE on the full symmetric matrix g (n(n+1)/2 coordinates).
//
// On a homogeneous metric R is spatially constant, so the average scalar
// curvature r of the normalized flow is R itself and min_x R(x, t) is R.

#include "hricci/finite_difference.hpp"
#include "hricci/monitor_sample.hpp"

#include <functional>
#include <optional>
#include <sstream>

namespace hricci {

enum class FlowKind { unnormalized, normalized };
enum class Method { rk4, rkf45 };
enum class Termination { reached_t_end, curvature_blowup, spd_guard, max_steps };

inline std::string to_string(FlowKind k) {
  return k == FlowKind::unnormalized ? "unnormalized" : "normalized";
}
inline std::string to_string(Method m) { return m == Method::rk4 ? "rk4" : "rkf45"; }
inline std::string to_string(Termination t) {
  switch (t) {
  case Termination::reached_t_end:
    return "reached_t_end";
  case Termination::curvature_blowup:
    return "curvature_blowup";
  case Termination::spd_guard:
    return "spd_guard";
  case Termination::max_steps:
    return "max_steps";
  }
  return "unknown";
}

/// Accepts "ricci" as an alias for the unnormalized flow.
inline FlowKind parse_flow_kind(const std::string &s) {
  if (s == "ricci" || s == "unnormalized")
    return FlowKind::unnormalized;
  if (s == "normalized")
    return FlowKind::normalized;
  throw InvalidStateError("unknown flow kind '" + s + "' (expected ricci|normalized)");
}
inline Method parse_method(const std::string &s) {
  if (s == "rk4")
    return Method::rk4;
  if (s == "rkf45" || s == "rkf45-adaptive")
    return Method::rkf45;
  throw InvalidStateError("unknown integrator method '" + s + "' (expected rk4|rkf45)");
}
inline Termination parse_termination(const std::string &s) {
  for (auto t : {Termination::reached_t_end, Termination::curvature_blowup, Termination::spd_guard,
                 Termination::max_steps})
    if (to_string(t) == s)
      return t;
  throw InvalidStateError("unknown termination reason '" + s + "'");
}

/// The adaptive controller could not meet its tolerance.
class IntegrationError : public Error {
public:
  IntegrationError(const std::string &what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

private:
  double time_;
};

struct IntegratorConfig {
  Method method = Method::rkf45;
  /// Fixed step for rk4, initial step for rkf45.
  double step = 1e-3;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double t_end = 1.0;
  long max_steps = 1'000'000;
  /// Stop once the smallest eigenvalue of g drops below this.
  double min_eig_stop = 1e-6;
  /// Stop once |Ric|^2_g exceeds this.
  double ricci_ceiling = 1e12;

  void validate() const {
    if (!(step > 0.0))
      throw InvalidStateError("integrator step must be positive");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw InvalidStateError("integrator tolerances must be positive");
    if (rel_tol < 1e-14)
      throw InvalidStateError("rel_tol below 1e-14 is under double rounding");
    if (!(t_end > 0.0))
      throw InvalidStateError("t_end must be positive");
    if (max_steps < 1)
      throw InvalidStateError("max_steps must be >= 1");
    if (!(min_eig_stop > 0.0))
      throw InvalidStateError("min_eig_stop must be positive");
    if (!(ricci_ceiling > 0.0))
      throw InvalidStateError("ricci_ceiling must be positive");
  }
};

/// Which times end up in the trajectory.
struct Sampling {
  /// 0: every accepted step. > 0: steps are clipped to land on multiples of
  /// stride (and t_end) and only those knots are recorded.
  double stride = 0.0;
  /// Extra output times, filled by cubic Hermite interpolation between
  /// accepted steps.
  std::vector<double> dense_times;
};

struct FlowState {
  double t = 0.0;
  LeftInvariantMetric g;
  double V = 1.0;
  FlowKind kind = FlowKind::unnormalized;
};

struct TrajectoryPoint {
  FlowState state;
  CurvatureData curvature;
  MonitorSample monitor;
};

struct Trajectory {
  FlowKind kind = FlowKind::unnormalized;
  StructureConstants sc;
  Matrix g0;
  double volume0 = 1.0;
  /// Integrator tolerance the samples were produced with.
  double rel_tol = 1e-9;
  Termination termination = Termination::reached_t_end;
  std::vector<TrajectoryPoint> points;

  std::size_t size() const { return points.size(); }
  int dim() const { return sc.dim(); }
  double t_final() const { return points.empty() ? 0.0 : points.back().state.t; }

  std::vector<double> times() const {
    return series([](const TrajectoryPoint &p) { return p.state.t; });
  }
  std::vector<double> series(const std::function<double(const TrajectoryPoint &)> &f) const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto &p : points)
      out.push_back(f(p));
    return out;
  }
};

/// dg/dt = -2 Ric(g).
inline Matrix ricci_rhs(const CurvatureData &cd) { return -2.0 * linalg::symmetrize(cd.ricci); }

/// dg/dt = (2/n) R g - 2 Ric(g).
inline Matrix normalized_rhs(const CurvatureData &cd, const LeftInvariantMetric &g) {
  return (2.0 / g.dim()) * cd.scalar * g.matrix() - 2.0 * linalg::symmetrize(cd.ricci);
}

inline Matrix ricci_rhs(const StructureConstants &sc, const LeftInvariantMetric &g) {
  return ricci_rhs(curvature(sc, g));
}

inline Matrix normalized_rhs(const StructureConstants &sc, const LeftInvariantMetric &g) {
  return normalized_rhs(curvature(sc, g), g);
}

inline Matrix flow_rhs(FlowKind kind, const CurvatureData &cd, const LeftInvariantMetric &g) {
  return kind == FlowKind::unnormalized ? ricci_rhs(cd) : normalized_rhs(cd, g);
}

/// V0 sqrt(det g / det g0).
inline double volume_of(const LeftInvariantMetric &g, const LeftInvariantMetric &g0,
                        double volume0) {
  return volume0 * std::exp(0.5 * (g.log_det() - g0.log_det()));
}

namespace detail {

/// What a Runge-Kutta stage needs: the metric, its symmetrized Ricci tensor
/// and the flow velocity.
struct Evaluation {
  LeftInvariantMetric g;
  Matrix ricci;
  double scalar = 0.0;
  Vector rhs;
};

inline Evaluation evaluate(const StructureConstants &sc, FlowKind kind, const Vector &y) {
  const int n = sc.dim();
  LeftInvariantMetric g(linalg::unpack_upper(y, n));
  Matrix ric = linalg::symmetrize(ricci_tensor(sc, g));
  const double scalar = g.cholesky().solve(ric).trace();
  Matrix velocity = -2.0 * ric;
  if (kind == FlowKind::normalized)
    velocity += (2.0 / n) * scalar * g.matrix();
  Vector rhs = linalg::pack_upper(velocity);
  return {std::move(g), std::move(ric), scalar, std::move(rhs)};
}

inline Vector hermite(const Vector &y0, const Vector &f0, const Vector &y1, const Vector &f1,
                      double h, double theta) {
  const double t2 = theta * theta, t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

// Fehlberg 4(5) tableau.
struct Fehlberg {
  static constexpr double a21 = 1.0 / 4;
  static constexpr double a31 = 3.0 / 32, a32 = 9.0 / 32;
  static constexpr double a41 = 1932.0 / 2197, a42 = -7200.0 / 2197, a43 = 7296.0 / 2197;
  static constexpr double a51 = 439.0 / 216, a52 = -8.0, a53 = 3680.0 / 513,
                          a54 = -845.0 / 4104;
  static constexpr double a61 = -8.0 / 27, a62 = 2.0, a63 = -3544.0 / 2565, a64 = 1859.0 / 4104,
                          a65 = -11.0 / 40;
  static constexpr double b1 = 16.0 / 135, b3 = 6656.0 / 12825, b4 = 28561.0 / 56430,
                          b5 = -9.0 / 50, b6 = 2.0 / 55;
  static constexpr double e1 = 16.0 / 135 - 25.0 / 216, e3 = 6656.0 / 12825 - 1408.0 / 2565,
                          e4 = 28561.0 / 56430 - 2197.0 / 4104, e5 = -9.0 / 50 + 1.0 / 5,
                          e6 = 2.0 / 55;
};

struct StepResult {
  Vector y;
  Vector error;
};

inline std::optional<StepResult> try_step(const StructureConstants &sc, FlowKind kind, Method method,
                                          const Vector &y, const Vector &k1, double h) {
  auto f = [&](const Vector &x) { return evaluate(sc, kind, x).rhs; };
  try {
    if (method == Method::rk4) {
      const Vector k2 = f(y + 0.5 * h * k1);
      const Vector k3 = f(y + 0.5 * h * k2);
      const Vector k4 = f(y + h * k3);
      return StepResult{y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), Vector::Zero(y.size())};
    }
    using F = Fehlberg;
    const Vector k2 = f(y + h * F::a21 * k1);
    const Vector k3 = f(y + h * (F::a31 * k1 + F::a32 * k2));
    const Vector k4 = f(y + h * (F::a41 * k1 + F::a42 * k2 + F::a43 * k3));
    const Vector k5 = f(y + h * (F::a51 * k1 + F::a52 * k2 + F::a53 * k3 + F::a54 * k4));
    const Vector k6 =
        f(y + h * (F::a61 * k1 + F::a62 * k2 + F::a63 * k3 + F::a64 * k4 + F::a65 * k5));
    StepResult r;
    r.y = y + h * (F::b1 * k1 + F::b3 * k3 + F::b4 * k4 + F::b5 * k5 + F::b6 * k6);
    r.error = h * (F::e1 * k1 + F::e3 * k3 + F::e4 * k4 + F::e5 * k5 + F::e6 * k6);
    return r;
  } catch (const InvalidStateError &) {
    // A stage left the SPD cone.
    return std::nullopt;
  }
}

inline TrajectoryPoint make_point(double t, LeftInvariantMetric g, const LeftInvariantMetric &g0,
                                  double volume0, FlowKind kind, const StructureConstants &sc) {
  CurvatureData cd = curvature(sc, g);
  const double v = volume_of(g, g0, volume0);
  MonitorSample m = make_monitor_sample(t, cd, v);
  return {FlowState{t, std::move(g), v, kind}, std::move(cd), m};
}

} // namespace detail

/// Integrates the chosen flow from g0 up to config.t_end. Stops early (and
/// says why in Trajectory::termination) when the metric approaches the
/// boundary of the SPD cone or the curvature exceeds the ceiling; it never
/// extrapolates past such a point.
inline Trajectory integrate(const StructureConstants &sc, const LeftInvariantMetric &g0,
                            double volume0, FlowKind kind, const IntegratorConfig &config,
                            const Sampling &sampling = {}) {
  config.validate();
  if (!(volume0 > 0.0))
    throw InvalidStateError("initial volume must be positive");
  if (sampling.stride < 0.0)
    throw InvalidStateError("sampling stride must be >= 0");
  detail::require_same_dim(sc, g0);

  const int n = sc.dim();
  Trajectory traj;
  traj.kind = kind;
  traj.sc = sc;
  traj.g0 = g0.matrix();
  traj.volume0 = volume0;
  traj.rel_tol = config.rel_tol;

  std::vector<double> dense = sampling.dense_times;
  std::sort(dense.begin(), dense.end());
  std::size_t next_dense = 0;
  while (next_dense < dense.size() && dense[next_dense] <= 0.0)
    ++next_dense;

  Vector y = linalg::pack_upper(g0.matrix());
  detail::Evaluation ev = detail::evaluate(sc, kind, y);
  Vector k1 = ev.rhs;
  traj.points.push_back(detail::make_point(0.0, g0, g0, volume0, kind, sc));

  double t = 0.0;
  double h = std::min(config.step, config.t_end);
  long grid_index = 1;
  long accepted = 0;

  while (t < config.t_end) {
    if (accepted >= config.max_steps) {
      traj.termination = Termination::max_steps;
      return traj;
    }
    double target = config.t_end;
    if (sampling.stride > 0.0) {
      const double knot = static_cast<double>(grid_index) * sampling.stride;
      // A knot within rounding of t_end would leave a sliver step behind it.
      if (config.t_end - knot > 1e-9 * sampling.stride)
        target = std::min(target, knot);
    }
    const double h_try = std::min(h, target - t);
    const bool hits_target = h_try >= target - t;

    auto step = detail::try_step(sc, kind, config.method, y, k1, h_try);
    double err = 0.0;
    if (step && config.method == Method::rkf45) {
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double sc_i =
            config.abs_tol + config.rel_tol * std::max(std::abs(y(i)), std::abs(step->y(i)));
        err = std::max(err, std::abs(step->error(i)) / sc_i);
      }
    }

    std::optional<detail::Evaluation> next;
    if (step && err <= 1.0) {
      try {
        next = detail::evaluate(sc, kind, step->y);
      } catch (const InvalidStateError &) {
        next.reset();
      }
    }

    if (!next) {
      if (config.method == Method::rk4) {
        traj.termination = Termination::spd_guard;
        return traj;
      }
      const bool stage_failed = !step || err <= 1.0;
      h = h_try * (stage_failed ? 0.25 : std::max(0.1, 0.9 * std::pow(err, -0.25)));
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "step size underflow at t = " << t << " (adaptive controller cannot meet tolerance)";
        throw IntegrationError(os.str(), t);
      }
      continue;
    }

    const double t_new = hits_target ? target : t + h_try;
    ++accepted;

    if (next->g.min_eigenvalue() < config.min_eig_stop) {
      traj.termination = Termination::spd_guard;
      return traj;
    }
    if (linalg::g_norm_sq(next->g.inverse(), next->ricci) > config.ricci_ceiling) {
      traj.termination = Termination::curvature_blowup;
      return traj;
    }

    // Dense output strictly inside (t, t_new).
    while (next_dense < dense.size() && dense[next_dense] < t_new) {
      const double td = dense[next_dense++];
      if (td <= t)
        continue;
      const Vector yd = detail::hermite(y, k1, step->y, next->rhs, t_new - t, (td - t) / (t_new - t));
      traj.points.push_back(detail::make_point(
          td, LeftInvariantMetric(linalg::unpack_upper(yd, n)), g0, volume0, kind, sc));
    }
    while (next_dense < dense.size() && dense[next_dense] == t_new)
      ++next_dense;

    const bool on_grid = sampling.stride <= 0.0 || hits_target;
    if (hits_target && sampling.stride > 0.0 && target < config.t_end)
      ++grid_index;

    y = step->y;
    k1 = next->rhs;
    if (on_grid || t_new >= config.t_end)
      traj.points.push_back(detail::make_point(t_new, next->g, g0, volume0, kind, sc));
    t = t_new;

    if (config.method == Method::rkf45) {
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // Clipping to an output time must not shrink the controller's step.
      if (h_try < h)
        h = factor >= 1.0 ? h : h_try * factor;
      else
        h = h_try * factor;
    }
  }
  traj.termination = Termination::reached_t_end;
  return traj;
}

/// Worst |dV/dt + R V| / (|R| V + eps_den) over interior samples, with dV/dt
/// from centered differences. Only meaningful for the unnormalized flow,
/// where dV/dt = -int R dmu = -R V.
inline double volume_law_residual(const Trajectory &traj, double eps_den = 1e-12) {
  if (traj.kind != FlowKind::unnormalized)
    throw InvalidStateError("volume law applies to the unnormalized flow; the normalized flow "
                            "preserves volume");
  if (traj.size() < 3)
    throw InvalidStateError("volume law check needs at least 3 samples");
  const auto t = traj.times();
  const auto v = traj.series([](const TrajectoryPoint &p) { return p.monitor.V; });
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double dv = fd::centered(t, v, k);
    const double r = traj.points[k].monitor.R;
    worst = std::max(worst, std::abs(dv + r * v[k]) / (std::abs(r) * v[k] + eps_den));
  }
  return worst;
}

/// Worst |V(t) - V0| / V0; the normalized flow should keep this at rounding level.
inline double volume_drift(const Trajectory &traj) {
  double worst = 0.0;
  for (const auto &p : traj.points)
    worst = std::max(worst, std::abs(p.monitor.V - traj.volume0) / traj.volume0);
  return worst;
}

/// Maps an unnormalized trajectory to the normalized flow:
/// g~ = (V0/V)^(2/n) g at time t~ = int_0^t (V0/V(s))^(2/n) ds.
/// The integrand phi satisfies phi' = (2/n) R phi, which gives the endpoint
/// correction of a fourth-order trapezoid rule.
inline Trajectory gauge_transform(const Trajectory &traj) {
  if (traj.kind != FlowKind::unnormalized)
    throw InvalidStateError("gauge transform takes an unnormalized trajectory");
  if (traj.points.empty())
    throw InvalidStateError("empty trajectory");
  const int n = traj.dim();
  const LeftInvariantMetric g0(traj.g0);

  Trajectory out;
  out.kind = FlowKind::normalized;
  out.sc = traj.sc;
  out.g0 = traj.g0;
  out.volume0 = traj.volume0;
  out.rel_tol = traj.rel_tol;
  out.termination = traj.termination;

  double t_tilde = 0.0;
  double prev_t = 0.0, prev_phi = 0.0, prev_dphi = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto &p = traj.points[k];
    const double phi = std::pow(traj.volume0 / p.monitor.V, 2.0 / n);
    const double dphi = (2.0 / n) * p.monitor.R * phi;
    if (k > 0) {
      const double h = p.state.t - prev_t;
      t_tilde += 0.5 * h * (prev_phi + phi) + h * h / 12.0 * (prev_dphi - dphi);
    }
    prev_t = p.state.t;
    prev_phi = phi;
    prev_dphi = dphi;

    LeftInvariantMetric g(phi * p.state.g.matrix());
    CurvatureData cd = curvature(traj.sc, g);
    const double v = volume_of(g, g0, traj.volume0);
    MonitorSample m = make_monitor_sample(t_tilde, cd, v);
    out.points.push_back({FlowState{t_tilde, std::move(g), v, FlowKind::normalized}, std::move(cd), m});
  }
  return out;
}

} // namespace hricci
