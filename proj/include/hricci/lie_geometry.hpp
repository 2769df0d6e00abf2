#pragma once

// Lie algebras, left-invariant metrics and their curvature.
//
// Everything is computed in a fixed frame {e_i} of the Lie algebra. For
// left-invariant fields the Levi-Civita connection and the curvature tensor
// are purely algebraic in the structure constants and the (constant) metric
// coefficients, so no charts or discretization are involved.
//
// Compact quotients of Nil and Sol are only locally homogeneous; every
// quantity computed here is local, so they are treated the same way.

#include "hricci/linalg.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace hricci {

/// Bracket tensor c(k, i, j) with [e_i, e_j] = sum_k c(k, i, j) e_k.
class StructureConstants {
public:
  StructureConstants() = default;
  explicit StructureConstants(int dim)
      : dim_(dim), c_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {
    if (dim < 1)
      throw InvalidStateError("Lie algebra dimension must be >= 1");
  }

  int dim() const { return dim_; }

  double operator()(int k, int i, int j) const { return c_[index(k, i, j)]; }
  double &operator()(int k, int i, int j) { return c_[index(k, i, j)]; }

  /// Sets [e_i, e_j] component k to value and [e_j, e_i] to -value.
  void set_bracket(int i, int j, int k, double value) {
    (*this)(k, i, j) = value;
    (*this)(k, j, i) = -value;
  }

  /// Matrix of ad(e_i): column j holds the components of [e_i, e_j].
  Matrix ad(int i) const {
    Matrix m(dim_, dim_);
    for (int k = 0; k < dim_; ++k)
      for (int j = 0; j < dim_; ++j)
        m(k, j) = (*this)(k, i, j);
    return m;
  }

  /// Components of [x, y] for coordinate vectors x, y.
  Vector bracket(const Vector &x, const Vector &y) const {
    Vector out = Vector::Zero(dim_);
    for (int k = 0; k < dim_; ++k)
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          out(k) += (*this)(k, i, j) * x(i) * y(j);
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_)
      m = std::max(m, std::abs(v));
    return m;
  }

  bool operator==(const StructureConstants &) const = default;

private:
  std::size_t index(int k, int i, int j) const {
    return (static_cast<std::size_t>(k) * dim_ + i) * dim_ + j;
  }

  int dim_ = 0;
  std::vector<double> c_;
};

/// Inner product on the Lie algebra. Symmetric exactly as stored and
/// positive definite; both are enforced on construction.
class LeftInvariantMetric {
public:
  explicit LeftInvariantMetric(Matrix g) : g_(std::move(g)) {
    if (g_.rows() != g_.cols() || g_.rows() == 0)
      throw InvalidStateError("metric must be a non-empty square matrix");
    if (g_ != g_.transpose())
      throw InvalidStateError("metric is not symmetric");
    if (!g_.allFinite())
      throw InvalidStateError("metric has non-finite entries");
    llt_.compute(g_);
    if (llt_.info() != Eigen::Success)
      throw InvalidStateError("metric is not positive definite");
  }

  int dim() const { return static_cast<int>(g_.rows()); }
  const Matrix &matrix() const { return g_; }
  Matrix inverse() const { return llt_.solve(Matrix::Identity(dim(), dim())); }
  const Eigen::LLT<Matrix> &cholesky() const { return llt_; }

  double log_det() const {
    const Matrix &l = llt_.matrixLLT();
    double s = 0.0;
    for (int i = 0; i < dim(); ++i)
      s += std::log(l(i, i));
    return 2.0 * s;
  }

  double min_eigenvalue() const { return linalg::sym_eigenvalues(g_)(0); }

private:
  Matrix g_;
  Eigen::LLT<Matrix> llt_;
};

struct ValidationReport {
  double antisymmetry_residual = 0.0;
  double jacobi_residual = 0.0;
  /// Index quadruple (i, j, k, l) of the worst Jacobi residual, 0-based.
  std::array<int, 4> jacobi_worst{0, 0, 0, 0};
  double unimodular_residual = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool valid() const { return errors.empty(); }
  bool unimodular() const { return unimodular_residual <= tolerance; }
};

/// Checks antisymmetry, the Jacobi identity and unimodularity. Antisymmetry
/// and Jacobi failures are errors; non-unimodularity is only a warning since
/// the flow is well defined without it.
inline ValidationReport validate(const StructureConstants &sc, double tol = 1e-12) {
  ValidationReport rep;
  const int n = sc.dim();
  const double scale = std::max(1.0, sc.max_abs());
  rep.tolerance = tol * scale * scale;

  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rep.antisymmetry_residual =
            std::max(rep.antisymmetry_residual, std::abs(sc(k, i, j) + sc(k, j, i)));

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int m = 0; m < n; ++m)
            s += sc(m, i, j) * sc(l, m, k) + sc(m, j, k) * sc(l, m, i) +
                 sc(m, k, i) * sc(l, m, j);
          if (std::abs(s) > rep.jacobi_residual) {
            rep.jacobi_residual = std::abs(s);
            rep.jacobi_worst = {i, j, k, l};
          }
        }

  for (int j = 0; j < n; ++j) {
    double tr = 0.0;
    for (int i = 0; i < n; ++i)
      tr += sc(i, i, j);
    rep.unimodular_residual = std::max(rep.unimodular_residual, std::abs(tr));
  }

  if (rep.antisymmetry_residual > tol * scale) {
    std::ostringstream os;
    os << "bracket is not antisymmetric (max residual " << rep.antisymmetry_residual << ")";
    rep.errors.push_back(os.str());
  }
  if (rep.jacobi_residual > rep.tolerance) {
    std::ostringstream os;
    os << "Jacobi identity fails (max residual " << rep.jacobi_residual << " at (i,j,k,l) = ("
       << rep.jacobi_worst[0] << "," << rep.jacobi_worst[1] << "," << rep.jacobi_worst[2] << ","
       << rep.jacobi_worst[3] << "))";
    rep.errors.push_back(os.str());
  }
  if (!rep.unimodular()) {
    std::ostringstream os;
    os << "algebra is not unimodular (max |tr ad| = " << rep.unimodular_residual
       << "); no compact quotient exists";
    rep.warnings.push_back(os.str());
  }
  return rep;
}

/// Levi-Civita connection of a left-invariant metric: nabla_{e_i} e_j = sum_k G(k, i, j) e_k.
class ConnectionCoefficients {
public:
  explicit ConnectionCoefficients(int n)
      : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int dim() const { return n_; }
  double operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }
  double &operator()(int k, int i, int j) { return data_[index(k, i, j)]; }

  /// The endomorphism nabla_{e_i}; column j is nabla_{e_i} e_j.
  Matrix covariant(int i) const {
    Matrix m(n_, n_);
    for (int k = 0; k < n_; ++k)
      for (int j = 0; j < n_; ++j)
        m(k, j) = (*this)(k, i, j);
    return m;
  }

private:
  std::size_t index(int k, int i, int j) const {
    return (static_cast<std::size_t>(k) * n_ + i) * n_ + j;
  }

  int n_;
  std::vector<double> data_;
};

namespace detail {
inline void require_same_dim(const StructureConstants &sc, const LeftInvariantMetric &g) {
  if (sc.dim() != g.dim())
    throw InvalidStateError("metric dimension " + std::to_string(g.dim()) +
                            " does not match algebra dimension " + std::to_string(sc.dim()));
}
} // namespace detail

namespace detail {

/// Fills gamma[(k * n + i) * n + j] = G(k, i, j) from the Koszul formula.
inline void koszul(const StructureConstants &sc, const Matrix &gm, const Matrix &g_inv,
                   std::vector<double> &gamma) {
  const int n = sc.dim();
  const auto idx = [n](int a, int b, int c) {
    return (static_cast<std::size_t>(a) * n + b) * n + c;
  };
  // lowered(i, j, k) = <[e_i, e_j], e_k>
  std::vector<double> lowered(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) {
        const double c = sc(m, i, j);
        if (c == 0.0)
          continue;
        for (int k = 0; k < n; ++k)
          lowered[idx(i, j, k)] += c * gm(m, k);
      }
  gamma.assign(lowered.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const double low =
            0.5 * (lowered[idx(i, j, l)] - lowered[idx(j, l, i)] + lowered[idx(l, i, j)]);
        if (low == 0.0)
          continue;
        for (int k = 0; k < n; ++k)
          gamma[idx(k, i, j)] += g_inv(k, l) * low;
      }
}

} // namespace detail

/// Koszul formula for left-invariant fields (all metric coefficients constant):
/// <nabla_{e_i} e_j, e_k> = 1/2 (<[e_i,e_j],e_k> - <[e_j,e_k],e_i> + <[e_k,e_i],e_j>).
inline ConnectionCoefficients levi_civita(const StructureConstants &sc,
                                          const LeftInvariantMetric &g) {
  detail::require_same_dim(sc, g);
  const int n = sc.dim();
  std::vector<double> buf;
  detail::koszul(sc, g.matrix(), g.inverse(), buf);
  ConnectionCoefficients gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gamma(k, i, j) = buf[(static_cast<std::size_t>(k) * n + i) * n + j];
  return gamma;
}

struct CurvatureData {
  /// Ricci tensor as a bilinear form in the frame.
  Matrix ricci;
  /// R = trace(g^-1 Ric).
  double scalar = 0.0;
  /// |Ric|^2_g.
  double ric2 = 0.0;
  /// |Ric - (R/n) g|^2_g.
  double einstein_dev = 0.0;
  /// Eigenvalues of g^-1 Ric, ascending.
  Vector ricci_eigs;

  int dim() const { return static_cast<int>(ricci.rows()); }
  /// kappa in Ric = kappa g when the metric is Einstein.
  double einstein_constant() const { return scalar / dim(); }
};

namespace detail {

/// Ricci tensor from R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
/// traced as Ric(Y, Z) = tr(X -> R(X, Y) Z):
///   Ric_jk = sum_{i,p} (G(i,i,p) G(p,j,k) - G(i,j,p) G(p,i,k)) - sum_{i,m} c(m,i,j) G(i,m,k).
/// Not symmetrized.
inline Matrix ricci_tensor(const StructureConstants &sc, const LeftInvariantMetric &g,
                           const Matrix &g_inv) {
  require_same_dim(sc, g);
  const int n = sc.dim();
  std::vector<double> gamma;
  koszul(sc, g.matrix(), g_inv, gamma);
  const auto G = [&](int k, int i, int j) {
    return gamma[(static_cast<std::size_t>(k) * n + i) * n + j];
  };

  Matrix ricci = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int p = 0; p < n; ++p)
          s += G(i, i, p) * G(p, j, k) - G(i, j, p) * G(p, i, k);
        for (int m = 0; m < n; ++m)
          s -= sc(m, i, j) * G(i, m, k);
      }
      ricci(j, k) = s;
    }
  return ricci;
}

inline Matrix ricci_tensor(const StructureConstants &sc, const LeftInvariantMetric &g) {
  return ricci_tensor(sc, g, g.inverse());
}

} // namespace detail

inline CurvatureData curvature(const StructureConstants &sc, const LeftInvariantMetric &g) {
  const int n = sc.dim();
  CurvatureData cd;
  const Matrix g_inv = g.inverse();
  cd.ricci = detail::ricci_tensor(sc, g, g_inv);
  const Matrix sym = linalg::symmetrize(cd.ricci);
  cd.scalar = (g_inv * sym).trace();
  cd.ric2 = linalg::g_norm_sq(g_inv, sym);
  const Matrix traceless = sym - (cd.scalar / n) * g.matrix();
  cd.einstein_dev = std::max(0.0, linalg::g_norm_sq(g_inv, traceless));
  cd.ricci_eigs = linalg::generalized_eigenvalues(sym, g.matrix());
  return cd;
}

/// Principal Ricci curvatures of a 3D unimodular algebra in an orthonormal
/// Milnor frame [e2,e3] = l1 e1, [e3,e1] = l2 e2, [e1,e2] = l3 e3.
inline std::array<double, 3> milnor_ricci(const std::array<double, 3> &lambda) {
  const double half = 0.5 * (lambda[0] + lambda[1] + lambda[2]);
  const std::array<double, 3> mu{half - lambda[0], half - lambda[1], half - lambda[2]};
  return {2.0 * mu[1] * mu[2], 2.0 * mu[2] * mu[0], 2.0 * mu[0] * mu[1]};
}

/// Structure constants of the Milnor frame above (0-based: [e1,e2] = l0 e0, ...).
inline StructureConstants milnor_constants(double l1, double l2, double l3) {
  StructureConstants sc(3);
  sc.set_bracket(1, 2, 0, l1);
  sc.set_bracket(2, 0, 1, l2);
  sc.set_bracket(0, 1, 2, l3);
  return sc;
}

/// Brackets of the frame e'_i = sum_a P(a, i) e_a. Paired with g' = P^T g P
/// this describes the same metric Lie algebra.
inline StructureConstants change_frame(const StructureConstants &sc, const Matrix &p) {
  const int n = sc.dim();
  if (p.rows() != n || p.cols() != n)
    throw InvalidStateError("frame change has wrong dimension");
  Eigen::FullPivLU<Matrix> lu(p);
  if (!lu.isInvertible())
    throw InvalidStateError("frame change is singular");
  const Matrix p_inv = lu.inverse();
  StructureConstants out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vector b = sc.bracket(p.col(i), p.col(j));
      const Vector coeffs = p_inv * b;
      for (int k = 0; k < n; ++k)
        out(k, i, j) = coeffs(k);
    }
  return out;
}

/// A metric Lie algebra plus the covolume of the lattice quotient.
struct Geometry {
  std::string name;
  StructureConstants sc;
  LeftInvariantMetric metric;
  double volume0 = 1.0;
  /// Default integration horizon; the su2 family shrinks to a point in finite time.
  double suggested_t_end = 1.0;
};

inline const std::vector<std::string> &preset_catalog() {
  static const std::vector<std::string> names{"abelian3",  "su2_round", "su2_berger", "heisenberg",
                                              "sol",       "sl2r_diag", "custom"};
  return names;
}

/// Named geometries. su2_berger takes the diagonal metric entries (A, B, C),
/// default (2, 1, 1). "custom" geometries only come from a JSON document.
inline Geometry preset(const std::string &name, const std::vector<double> &params = {}) {
  auto no_params = [&] {
    if (!params.empty())
      throw InvalidStateError("preset '" + name + "' takes no parameters");
  };
  const Matrix id = Matrix::Identity(3, 3);
  if (name == "abelian3") {
    no_params();
    return {name, StructureConstants(3), LeftInvariantMetric(id), 1.0, 1.0};
  }
  if (name == "su2_round") {
    no_params();
    return {name, milnor_constants(2, 2, 2), LeftInvariantMetric(id), 1.0, 0.2};
  }
  if (name == "su2_berger") {
    std::vector<double> abc = params.empty() ? std::vector<double>{2.0, 1.0, 1.0} : params;
    if (abc.size() != 3)
      throw InvalidStateError("su2_berger takes three metric entries (A, B, C)");
    Matrix g = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
      g(i, i) = abc[static_cast<std::size_t>(i)];
    const double t_end = 0.2 * *std::min_element(abc.begin(), abc.end());
    return {name, milnor_constants(2, 2, 2), LeftInvariantMetric(g), 1.0, t_end};
  }
  if (name == "heisenberg") {
    no_params();
    return {name, milnor_constants(1, 0, 0), LeftInvariantMetric(id), 1.0, 1.0};
  }
  if (name == "sol") {
    no_params();
    return {name, milnor_constants(1, -1, 0), LeftInvariantMetric(id), 1.0, 1.0};
  }
  if (name == "sl2r_diag") {
    no_params();
    return {name, milnor_constants(1, 1, -1), LeftInvariantMetric(id), 1.0, 1.0};
  }
  std::string msg = "unknown preset '" + name + "'; catalog:";
  for (const auto &n : preset_catalog())
    msg += " " + n;
  if (name == "custom")
    msg = "preset 'custom' is given inline as a structure-constant document";
  throw InvalidStateError(msg);
}

} // namespace hricci
