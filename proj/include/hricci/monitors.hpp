#pragma once

// Monotone quantities along trajectories. On homogeneous solutions
//   normalized flow:   dR/dt            = 2 |Ric - (R/n) g|^2
//   unnormalized flow: d(R V^(2/n))/dt  = 2 |Ric - (R/n) g|^2 V^(2/n)
// and the checks below compare centered differences of the left-hand sides
// against the right-hand sides evaluated at the samples.

#include "hricci/flow_engine.hpp"

namespace hricci {

struct LemmaReport {
  std::string lemma;
  /// max over interior samples of |fd - closed| / max(|closed|, floor).
  double max_relative_residual = 0.0;
  std::size_t worst_index = 0;
  double worst_time = 0.0;
  /// Largest squared sampling step; the residual should scale with it.
  double step_sq = 0.0;
  /// Derivatives below this are treated as zero in the denominator.
  double denominator_floor = 0.0;
  std::vector<double> residuals;

  bool passed(double tol) const { return max_relative_residual < tol; }
};

namespace detail {

inline LemmaReport derivative_check(const std::string &name, const std::vector<double> &t,
                                    const std::vector<double> &q,
                                    const std::vector<double> &closed) {
  if (t.size() < 5)
    throw InvalidStateError(name + " needs at least 5 samples");
  LemmaReport rep;
  rep.lemma = name;
  double q_scale = 0.0;
  for (double v : q)
    q_scale = std::max(q_scale, std::abs(v));
  const double span = t.back() - t.front();
  double h_min = span;
  for (std::size_t k = 1; k < t.size(); ++k)
    h_min = std::min(h_min, t[k] - t[k - 1]);
  // Rates below integration noise (1e-8 of the quantity per unit time) or
  // below the rounding noise of a difference quotient count as zero.
  // Einstein trajectories are exactly stationary.
  const double rounding = 1e6 * std::numeric_limits<double>::epsilon() * q_scale / h_min;
  rep.denominator_floor = std::max({1e-12, 1e-8 * q_scale / span, rounding});
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    const double d = fd::centered(t, q, k);
    const double r =
        std::abs(d - closed[k]) / std::max(std::abs(closed[k]), rep.denominator_floor);
    rep.residuals.push_back(r);
    if (k == 1 || r > rep.max_relative_residual) {
      rep.max_relative_residual = r;
      rep.worst_index = k;
      rep.worst_time = t[k];
    }
    const double h = std::max(t[k] - t[k - 1], t[k + 1] - t[k]);
    rep.step_sq = std::max(rep.step_sq, h * h);
  }
  return rep;
}

} // namespace detail

/// dR/dt against 2 einstein_dev along a normalized trajectory.
inline LemmaReport lemma1_check(const Trajectory &traj) {
  if (traj.kind != FlowKind::normalized)
    throw InvalidStateError("lemma1_check applies to the normalized flow");
  return detail::derivative_check(
      "lemma1", traj.times(), traj.series([](const auto &p) { return p.monitor.R; }),
      traj.series([](const auto &p) { return 2.0 * p.monitor.einstein_dev; }));
}

/// d(R V^(2/n))/dt against 2 einstein_dev V^(2/n) along an unnormalized trajectory.
inline LemmaReport lemma2_check(const Trajectory &traj) {
  if (traj.kind != FlowKind::unnormalized)
    throw InvalidStateError("lemma2_check applies to the unnormalized flow");
  const int n = traj.dim();
  return detail::derivative_check(
      "lemma2", traj.times(), traj.series([](const auto &p) { return p.monitor.RV2n; }),
      traj.series([n](const auto &p) {
        return 2.0 * p.monitor.einstein_dev * volume_factor(p.monitor.V, n);
      }));
}

enum class MonotoneQuantity { R_normalized, RV2n };

inline std::string to_string(MonotoneQuantity q) {
  return q == MonotoneQuantity::R_normalized ? "R_normalized" : "RV2n";
}

struct MonotonicityVerdict {
  MonotoneQuantity quantity = MonotoneQuantity::RV2n;
  /// No step decreases by more than 10 * rel_tol * |q|.
  bool monotone = true;
  /// Largest decrease q_k - q_{k+1} seen (<= 0 when nondecreasing).
  double worst_violation = 0.0;
  std::size_t worst_index = 0;
  /// Every sample with einstein_dev above the threshold increases strictly
  /// over the following window.
  bool strictness = true;
  /// Every Einstein sample is stationary over its window, within tolerance.
  bool einstein_consistent = true;
  /// Sign of q at t = 0; recorded, not enforced.
  double initial_value = 0.0;

  bool passed() const { return monotone && strictness && einstein_consistent; }
};

struct MonotoneOptions {
  double tol_factor = 10.0;
  double einstein_threshold = 1e-8;
  std::size_t window = 10;
};

inline MonotonicityVerdict monotone_assert(const Trajectory &traj, MonotoneQuantity quantity,
                                           const MonotoneOptions &opt = {}) {
  const FlowKind expected = quantity == MonotoneQuantity::R_normalized ? FlowKind::normalized
                                                                       : FlowKind::unnormalized;
  if (traj.kind != expected)
    throw InvalidStateError(to_string(quantity) + " is monitored along the " +
                            to_string(expected) + " flow");
  if (traj.size() < 2)
    throw InvalidStateError("monotonicity check needs at least 2 samples");

  const auto q = traj.series([quantity](const TrajectoryPoint &p) {
    return quantity == MonotoneQuantity::R_normalized ? p.monitor.R : p.monitor.RV2n;
  });
  const auto dev = traj.series([](const TrajectoryPoint &p) { return p.monitor.einstein_dev; });
  auto tol = [&](std::size_t k) { return opt.tol_factor * traj.rel_tol * std::abs(q[k]); };

  MonotonicityVerdict v;
  v.quantity = quantity;
  v.initial_value = q.front();
  v.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < q.size(); ++k) {
    const double drop = q[k] - q[k + 1];
    if (drop > v.worst_violation) {
      v.worst_violation = drop;
      v.worst_index = k;
    }
    if (drop > tol(k))
      v.monotone = false;

    const std::size_t w = std::min(opt.window, q.size() - 1 - k);
    const double rise = q[k + w] - q[k];
    if (dev[k] > opt.einstein_threshold && !(rise > 0.0))
      v.strictness = false;
    // Near-Einstein samples may still rise at rate 2 einstein_dev V^(2/n).
    const double dt = traj.points[k + w].state.t - traj.points[k].state.t;
    const double rate_scale = quantity == MonotoneQuantity::RV2n
                                  ? volume_factor(traj.points[k].monitor.V, traj.dim())
                                  : 1.0;
    const double allowed = static_cast<double>(w) * tol(k) +
                           2.0 * opt.einstein_threshold * dt * rate_scale;
    if (dev[k] <= opt.einstein_threshold && std::abs(rise) > allowed)
      v.einstein_consistent = false;
  }
  return v;
}

enum class BreatherExclusion { steady_expanding_excluded, possible };

struct BreatherPrecondition {
  BreatherExclusion classification = BreatherExclusion::possible;
  /// R at t = 0; steady and expanding breathers need it strictly negative.
  double margin = 0.0;
};

inline BreatherPrecondition breather_precondition(const MonitorSample &initial) {
  return {initial.R >= 0.0 ? BreatherExclusion::steady_expanding_excluded
                           : BreatherExclusion::possible,
          initial.R};
}

inline std::string to_string(BreatherExclusion b) {
  return b == BreatherExclusion::steady_expanding_excluded ? "steady/expanding-excluded"
                                                           : "possible";
}

} // namespace hricci
