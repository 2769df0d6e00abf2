#pragma once

#include "hricci/spectral.hpp"

namespace hricci {

/// Scalar monitors recorded at every trajectory sample.
struct MonitorSample {
  double t = 0.0;
  double R = 0.0;
  /// R * V^(2/n), scale and reparametrization invariant.
  double RV2n = 0.0;
  double einstein_dev = 0.0;
  double ric2 = 0.0;
  double perelman_lambda = 0.0;
  double V = 0.0;
};

/// V^(2/n). Shared by every monitor that needs it so products agree bitwise.
inline double volume_factor(double volume, int n) { return std::pow(volume, 2.0 / n); }

inline MonitorSample make_monitor_sample(double t, const CurvatureData &cd, double volume) {
  MonitorSample s;
  s.t = t;
  s.R = cd.scalar;
  s.RV2n = s.R * volume_factor(volume, cd.dim());
  s.einstein_dev = cd.einstein_dev;
  s.ric2 = cd.ric2;
  s.perelman_lambda = spectral::perelman_lambda(cd);
  s.V = volume;
  return s;
}

} // namespace hricci
