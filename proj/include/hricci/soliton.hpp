#pragma once

// Soliton and breather classification.
//
// The soliton identity -2 Ric(g) = 2 eps g + L_X g is made finite dimensional
// by restricting X to fields whose action on the Lie algebra is a derivation
// D, for which (L_X g)_ij = (g D)_ij + (g D)_ji. Sign convention: shrinking
// means eps < 0, expanding eps > 0, steady eps = 0.

#include "hricci/monitors.hpp"

namespace hricci {

/// max over frame pairs of |D[e_i,e_j] - [D e_i, e_j] - [e_i, D e_j]|.
inline double derivation_defect(const StructureConstants &sc, const Matrix &d) {
  const int n = sc.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vector ei = Vector::Unit(n, i), ej = Vector::Unit(n, j);
      const Vector defect =
          d * sc.bracket(ei, ej) - sc.bracket(d * ei, ej) - sc.bracket(ei, d * ej);
      worst = std::max(worst, defect.cwiseAbs().maxCoeff());
    }
  return worst;
}

/// Orthonormal (Frobenius) basis of Der(g), the null space of the linear
/// system D[x,y] = [Dx,y] + [x,Dy] over all frame pairs i < j.
inline std::vector<Matrix> derivation_space(const StructureConstants &sc,
                                            double rel_cutoff = 1e-10) {
  const int n = sc.dim();
  const int pairs = n * (n - 1) / 2;
  const int rows = std::max(1, pairs * n);
  const int unknowns = n * n;
  // Unknown D(p, q) sits at column p * n + q.
  Matrix sys = Matrix::Zero(rows, unknowns);
  int row = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int l = 0; l < n; ++l, ++row) {
        for (int k = 0; k < n; ++k)
          sys(row, l * n + k) += sc(k, i, j);
        for (int p = 0; p < n; ++p) {
          sys(row, p * n + i) -= sc(l, p, j);
          sys(row, p * n + j) -= sc(l, i, p);
        }
      }

  Eigen::JacobiSVD<Matrix> svd(sys, Eigen::ComputeFullV);
  const Vector &sv = svd.singularValues();
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_cutoff * largest)
      ++rank;

  std::vector<Matrix> basis;
  for (int c = rank; c < unknowns; ++c) {
    Matrix d(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        d(p, q) = svd.matrixV()(p * n + q, c);
    basis.push_back(std::move(d));
  }
  return basis;
}

enum class SolitonClass { einstein, algebraic_soliton_candidate, none };
enum class SolitonType { steady, shrinking, expanding };

inline std::string to_string(SolitonClass c) {
  switch (c) {
  case SolitonClass::einstein:
    return "einstein";
  case SolitonClass::algebraic_soliton_candidate:
    return "algebraic-soliton-candidate";
  case SolitonClass::none:
    return "none";
  }
  return "none";
}

inline std::string to_string(SolitonType t) {
  switch (t) {
  case SolitonType::steady:
    return "steady";
  case SolitonType::shrinking:
    return "shrinking";
  case SolitonType::expanding:
    return "expanding";
  }
  return "steady";
}

struct SolitonThresholds {
  /// Einstein when |Ric - (R/n) g|^2_g is below this.
  double einstein_dev = 1e-10;
  /// Candidate when residual / |Ric|_g is below this.
  double soliton_residual = 1e-8;
  /// |eps| below this is reported as steady.
  double steady_band = 1e-9;
  double rank_cutoff = 1e-10;
};

struct SolitonReport {
  double epsilon = 0.0;
  Matrix D;
  /// |2 Ric + 2 eps g + g D + (g D)^T|_g at the optimum.
  double residual = 0.0;
  /// residual / |Ric|_g (0 for flat metrics).
  double relative_residual = 0.0;
  /// |g D + (g D)^T|_g, the Lie-derivative part of the fit.
  double lie_derivative_norm = 0.0;
  double einstein_dev = 0.0;
  double ricci_norm = 0.0;
  int derivation_dim = 0;
  SolitonClass classification = SolitonClass::none;
  SolitonType type = SolitonType::steady;
};

namespace detail {

/// W(T) = L^-1 T L^-T with g = L L^T, so |T|_g = |W(T)|_F.
inline Vector whiten(const Eigen::LLT<Matrix> &llt, const Matrix &t) {
  const auto l = llt.matrixL();
  const Matrix a = l.solve(t);
  const Matrix w = l.solve(a.transpose());
  return w.reshaped();
}

inline Matrix lie_derivative(const Matrix &g, const Matrix &d) {
  const Matrix gd = g * d;
  return gd + gd.transpose();
}

} // namespace detail

/// Defect of the soliton identity for a given (eps, D), in the g-norm.
inline double soliton_residual(const StructureConstants &sc, const LeftInvariantMetric &g,
                               double epsilon, const Matrix &d) {
  const CurvatureData cd = curvature(sc, g);
  const Matrix t = 2.0 * linalg::symmetrize(cd.ricci) + 2.0 * epsilon * g.matrix() +
                   detail::lie_derivative(g.matrix(), d);
  return std::sqrt(std::max(0.0, linalg::g_norm_sq(g.inverse(), t)));
}

/// Least-squares fit of -2 Ric = 2 eps g + L_D g over eps and D in Der(g).
/// Minimum-norm solution, so Killing directions (D skew for g) come out zero.
inline SolitonReport soliton_fit(const StructureConstants &sc, const LeftInvariantMetric &g,
                                 const SolitonThresholds &thr = {}) {
  const CurvatureData cd = curvature(sc, g);
  const std::vector<Matrix> ders = derivation_space(sc, thr.rank_cutoff);
  const int n = sc.dim();
  const Matrix &gm = g.matrix();
  const auto &llt = g.cholesky();

  Matrix design(n * n, 1 + static_cast<int>(ders.size()));
  design.col(0) = detail::whiten(llt, 2.0 * gm);
  for (std::size_t b = 0; b < ders.size(); ++b)
    design.col(static_cast<Eigen::Index>(b) + 1) =
        detail::whiten(llt, detail::lie_derivative(gm, ders[b]));
  const Matrix ric = linalg::symmetrize(cd.ricci);
  const Vector rhs = -detail::whiten(llt, 2.0 * ric);

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(thr.rank_cutoff);
  cod.compute(design);
  const Vector x = cod.solve(rhs);

  SolitonReport rep;
  rep.epsilon = x(0);
  rep.D = Matrix::Zero(n, n);
  for (std::size_t b = 0; b < ders.size(); ++b)
    rep.D += x(static_cast<Eigen::Index>(b) + 1) * ders[b];
  rep.derivation_dim = static_cast<int>(ders.size());
  rep.residual = (design * x - rhs).norm();
  rep.lie_derivative_norm = detail::whiten(llt, detail::lie_derivative(gm, rep.D)).norm();
  rep.einstein_dev = cd.einstein_dev;
  rep.ricci_norm = std::sqrt(cd.ric2);
  rep.relative_residual = rep.ricci_norm > 0.0 ? rep.residual / rep.ricci_norm : rep.residual;

  const double lie_sq = rep.lie_derivative_norm * rep.lie_derivative_norm;
  if (cd.einstein_dev < thr.einstein_dev && lie_sq < thr.einstein_dev)
    rep.classification = SolitonClass::einstein;
  else if (rep.relative_residual < thr.soliton_residual)
    rep.classification = SolitonClass::algebraic_soliton_candidate;
  else
    rep.classification = SolitonClass::none;

  if (std::abs(rep.epsilon) < thr.steady_band)
    rep.type = SolitonType::steady;
  else
    rep.type = rep.epsilon < 0.0 ? SolitonType::shrinking : SolitonType::expanding;
  return rep;
}

/// For an Einstein g0 (Ric = kappa g0) the flow is g(t) = (1 + 2 eps t) g0
/// with eps = -kappa. Returns the worst relative Frobenius deviation of the
/// trajectory from that family.
inline double canonical_form_check(const StructureConstants &sc, const LeftInvariantMetric &g0,
                                   const Trajectory &traj, const SolitonThresholds &thr = {}) {
  if (traj.kind != FlowKind::unnormalized)
    throw InvalidStateError("canonical form check takes an unnormalized trajectory");
  const SolitonReport fit = soliton_fit(sc, g0, thr);
  if (fit.classification != SolitonClass::einstein)
    throw UnsupportedError("canonical form check needs an Einstein initial metric; the "
                           "diffeomorphisms of a non-Einstein soliton are not represented");
  const double epsilon = -curvature(sc, g0).einstein_constant();
  double worst = 0.0;
  for (const auto &p : traj.points) {
    const Matrix exact = (1.0 + 2.0 * epsilon * p.state.t) * g0.matrix();
    worst = std::max(worst, (p.state.g.matrix() - exact).norm() / exact.norm());
  }
  return worst;
}

enum class BreatherVerdict { none_found, einstein_recurrence, violation_flag };

inline std::string to_string(BreatherVerdict v) {
  switch (v) {
  case BreatherVerdict::none_found:
    return "none-found";
  case BreatherVerdict::einstein_recurrence:
    return "einstein-recurrence";
  case BreatherVerdict::violation_flag:
    return "violation-flag";
  }
  return "none-found";
}

struct BreatherCandidate {
  double t = 0.0;
  double alpha = 1.0;
  double distance = 0.0;
};

struct BreatherScanResult {
  std::vector<BreatherCandidate> candidates;
  BreatherVerdict verdict = BreatherVerdict::none_found;
  /// Smallest signature distance over the scanned samples.
  double min_distance = std::numeric_limits<double>::infinity();
  std::size_t samples_scanned = 0;
};

/// Scale-invariant isometry signature distance between alpha g(t) and g(0):
/// the largest of
///   - |eig(g0^-1 alpha g(t)) - 1|,
///   - |Ricci eigenvalues of alpha g(t) - those of g0| / |Ric(g0)|,
///   - |R V^(2/n)(t) - R V^(2/n)(0)| / (|Ric(g0)| V0^(2/n)),
///   - |dev V^(4/n)(t) - dev V^(4/n)(0)| / (|Ric(g0)| V0^(2/n))^2.
/// A necessary condition for isometry only.
inline double signature_distance(const Matrix &g0, const CurvatureData &c0, double v0,
                                 const TrajectoryPoint &p, double alpha) {
  const int n = c0.dim();
  double scale = std::sqrt(c0.ric2);
  if (scale == 0.0)
    scale = 1.0;
  const double vf0 = volume_factor(v0, n);
  const double vf = volume_factor(p.monitor.V, n);

  double d = 0.0;
  const Vector ratio = linalg::generalized_eigenvalues(alpha * p.state.g.matrix(), g0);
  for (Eigen::Index i = 0; i < ratio.size(); ++i)
    d = std::max(d, std::abs(ratio(i) - 1.0));
  for (Eigen::Index i = 0; i < c0.ricci_eigs.size(); ++i)
    d = std::max(d, std::abs(p.curvature.ricci_eigs(i) / alpha - c0.ricci_eigs(i)) / scale);
  d = std::max(d, std::abs(p.monitor.RV2n - c0.scalar * vf0) / (scale * vf0));
  d = std::max(d, std::abs(p.monitor.einstein_dev * vf * vf - c0.einstein_dev * vf0 * vf0) /
                      (scale * scale * vf0 * vf0));
  return d;
}

/// Looks for t > t_min with alpha g(t) matching g(0), alpha = (V(0)/V(t))^(2/n).
/// Recurrences from an Einstein g0 are the homothety family; any other
/// recurrence is flagged for inspection.
inline BreatherScanResult breather_scan(const Trajectory &traj, const LeftInvariantMetric &g0,
                                        double tol = 1e-6, double t_min = 0.0,
                                        const SolitonThresholds &thr = {}) {
  if (traj.kind != FlowKind::unnormalized)
    throw InvalidStateError("breather scan takes an unnormalized trajectory");
  const int n = traj.dim();
  const CurvatureData c0 = curvature(traj.sc, g0);
  const double v0 = traj.points.empty() ? traj.volume0 : traj.points.front().monitor.V;

  BreatherScanResult res;
  for (const auto &p : traj.points) {
    if (!(p.state.t > t_min) || !(p.state.t > 0.0))
      continue;
    ++res.samples_scanned;
    const double alpha = std::pow(v0 / p.monitor.V, 2.0 / n);
    const double d = signature_distance(g0.matrix(), c0, v0, p, alpha);
    res.min_distance = std::min(res.min_distance, d);
    if (d < tol)
      res.candidates.push_back({p.state.t, alpha, d});
  }
  if (res.samples_scanned < 10)
    throw InvalidStateError("breather scan needs at least 10 samples past t_min, got " +
                            std::to_string(res.samples_scanned));
  if (!res.candidates.empty())
    res.verdict = c0.einstein_dev < thr.einstein_dev ? BreatherVerdict::einstein_recurrence
                                                     : BreatherVerdict::violation_flag;
  return res;
}

} // namespace hricci
