#pragma once

// Closed-form Laplace spectra (flat tori, round spheres) and the spectral
// identities checked against them. No eigensolver: every eigenvalue here is
// exact up to floating point.

#include "hricci/lie_geometry.hpp"

#include <cstdint>
#include <numbers>
#include <variant>

namespace hricci::spectral {

struct Eigenvalue {
  double value = 0.0;
  int multiplicity = 1;
};

struct Spectrum {
  std::vector<Eigenvalue> eigenvalues;
  /// Eigenvalues strictly below this are complete; above it the list may
  /// be missing lattice points outside the enumeration box.
  double reliable_below = std::numeric_limits<double>::infinity();
};

/// R^n / Z^n with a constant metric in frame coordinates.
struct FlatTorus {
  Matrix metric;
  int cutoff = 1;
};

struct RoundSphere {
  int n = 2;
  double radius = 1.0;
  int k_max = 4;
};

using SpectrumModel = std::variant<FlatTorus, RoundSphere>;

namespace detail {

inline std::vector<Eigenvalue> merge_sorted(std::vector<double> values, double rel_tol) {
  std::sort(values.begin(), values.end());
  std::vector<Eigenvalue> out;
  for (double v : values) {
    if (!out.empty()) {
      Eigenvalue &last = out.back();
      const double scale = std::max(std::abs(last.value), std::abs(v));
      if (std::abs(v - last.value) <= rel_tol * scale) {
        ++last.multiplicity;
        continue;
      }
    }
    out.push_back({v, 1});
  }
  return out;
}

inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n)
    return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

} // namespace detail

/// Eigenvalues 4 pi^2 xi^T g^-1 xi over xi in Z^n with |xi|_inf <= cutoff.
inline Spectrum torus_spectrum(const Matrix &g, int cutoff) {
  if (cutoff < 1)
    throw InvalidStateError("torus cutoff must be >= 1");
  const LeftInvariantMetric metric(g);
  const int n = metric.dim();
  const Matrix g_inv = metric.inverse();
  const double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;

  std::vector<double> values;
  std::vector<int> xi(static_cast<std::size_t>(n), -cutoff);
  Vector v(n);
  for (;;) {
    for (int i = 0; i < n; ++i)
      v(i) = xi[static_cast<std::size_t>(i)];
    values.push_back(four_pi_sq * v.dot(g_inv * v));
    int d = 0;
    while (d < n && xi[static_cast<std::size_t>(d)] == cutoff)
      xi[static_cast<std::size_t>(d++)] = -cutoff;
    if (d == n)
      break;
    ++xi[static_cast<std::size_t>(d)];
  }

  Spectrum s;
  s.eigenvalues = detail::merge_sorted(std::move(values), 1e-12);
  s.reliable_below = four_pi_sq * cutoff * cutoff * linalg::sym_eigenvalues(g_inv)(0);
  return s;
}

/// Dimension of the degree-k spherical harmonics on S^n.
inline std::int64_t sphere_multiplicity(int n, int k) {
  return detail::binomial(n + k, n) - detail::binomial(n + k - 2, n);
}

/// k(k + n - 1) / radius^2 for k = 0..k_max.
inline Spectrum sphere_spectrum(int n, double radius, int k_max) {
  if (n < 2)
    throw InvalidStateError("sphere dimension must be >= 2");
  if (!(radius > 0.0))
    throw InvalidStateError("sphere radius must be positive");
  if (k_max < 0)
    throw InvalidStateError("k_max must be >= 0");
  Spectrum s;
  for (int k = 0; k <= k_max; ++k)
    s.eigenvalues.push_back({static_cast<double>(k) * (k + n - 1) / (radius * radius),
                             static_cast<int>(sphere_multiplicity(n, k))});
  return s;
}

inline Spectrum spectrum(const SpectrumModel &model) {
  if (const auto *t = std::get_if<FlatTorus>(&model))
    return torus_spectrum(t->metric, t->cutoff);
  const auto &s = std::get<RoundSphere>(model);
  return sphere_spectrum(s.n, s.radius, s.k_max);
}

/// The model with metric alpha * g.
inline SpectrumModel scaled(const SpectrumModel &model, double alpha) {
  if (const auto *t = std::get_if<FlatTorus>(&model))
    return FlatTorus{alpha * t->metric, t->cutoff};
  auto s = std::get<RoundSphere>(model);
  s.radius *= std::sqrt(alpha);
  return s;
}

/// Worst relative deviation between Spec(alpha g) and Spec(g) / alpha.
/// Returns +inf if the lists or multiplicities disagree.
inline double scaling_law_check(const SpectrumModel &model, double alpha) {
  if (!(alpha > 0.0))
    throw InvalidStateError("scale factor must be positive");
  const Spectrum base = spectrum(model);
  const Spectrum sc = spectrum(scaled(model, alpha));
  if (base.eigenvalues.size() != sc.eigenvalues.size())
    return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < base.eigenvalues.size(); ++i) {
    if (base.eigenvalues[i].multiplicity != sc.eigenvalues[i].multiplicity)
      return std::numeric_limits<double>::infinity();
    const double expected = base.eigenvalues[i].value / alpha;
    const double got = sc.eigenvalues[i].value;
    const double denom = std::abs(expected);
    worst = std::max(worst, denom == 0.0 ? std::abs(got) : std::abs(got - expected) / denom);
  }
  return worst;
}

struct VariationCheck {
  int n = 0;
  /// d lambda_1 / dt at t = 0 from lambda_1(t) = n / (1 - 2(n-1)t).
  double closed_form = 0.0;
  /// 2 int Ric(grad f, grad f) with Ric = (n-1) g and int |grad f|^2 = lambda_1.
  double formula = 0.0;
  double relative_gap = 0.0;
};

/// First variation of lambda_1 on the unit round S^n under the unnormalized
/// Ricci flow, where g(t) = (1 - 2(n-1)t) g0. Both sides are evaluated in
/// integer arithmetic.
inline VariationCheck eigenvalue_variation_check(int n) {
  if (n < 2)
    throw InvalidStateError("sphere dimension must be >= 2");
  const std::int64_t nn = n;
  const std::int64_t lambda1 = 1 * (1 + nn - 1); // k = 1, unit radius
  const std::int64_t shrink_rate = 2 * (nn - 1); // -d(radius^2)/dt
  // d/dt [lambda1 / (1 - rate t)] at 0
  const std::int64_t closed = lambda1 * shrink_rate;
  const std::int64_t ricci_const = nn - 1;
  const std::int64_t formula = 2 * ricci_const * lambda1;

  VariationCheck vc;
  vc.n = n;
  vc.closed_form = static_cast<double>(closed);
  vc.formula = static_cast<double>(formula);
  vc.relative_gap = static_cast<double>(closed > formula ? closed - formula : formula - closed) /
                    static_cast<double>(closed);
  return vc;
}

/// Least eigenvalue of -4 Delta + R on a homogeneous metric. R is constant and
/// -4 Delta >= 0 kills constants, so the Rayleigh quotient is minimized by
/// constants and the eigenvalue is R itself.
inline double perelman_lambda(const CurvatureData &cd) { return cd.scalar; }

inline double perelman_lambda(const StructureConstants &sc, const LeftInvariantMetric &g) {
  return perelman_lambda(curvature(sc, g));
}

} // namespace hricci::spectral
