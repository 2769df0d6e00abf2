#pragma once

// Reference computations that share no code with the library.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// c[k][i][j] stored flat, [e_i, e_j] = sum_k c(k,i,j) e_k.
struct Brackets {
  int n;
  std::vector<double> c;
  explicit Brackets(int dim) : n(dim), c(static_cast<std::size_t>(dim * dim * dim), 0.0) {}
  double &at(int k, int i, int j) { return c[static_cast<std::size_t>((k * n + i) * n + j)]; }
  double at(int k, int i, int j) const { return c[static_cast<std::size_t>((k * n + i) * n + j)]; }
  Vec bracket(const Vec &x, const Vec &y) const {
    Vec out = Vec::Zero(n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          out(k) += at(k, i, j) * x(i) * y(j);
    return out;
  }
};

/// Ricci tensor from the orthonormal-frame formula
///   r(X,X) = -1/2 sum |[X,E_i]|^2 - 1/2 B(X,X) + 1/4 sum <[E_i,E_j],X>^2 - <[Z,X],X>
/// with B the Killing form and <Z,X> = tr ad X, polarized for off-diagonal
/// entries. Works in the coordinates of the given basis with metric g.
inline Mat besse_ricci(const Brackets &b, const Mat &g) {
  const int n = b.n;
  // Columns of f are a g-orthonormal frame.
  const Mat l = g.llt().matrixL();
  const Mat f = l.transpose().inverse();
  auto inner = [&](const Vec &x, const Vec &y) { return x.dot(g * y); };
  auto ad = [&](const Vec &x) {
    Mat m(n, n);
    for (int j = 0; j < n; ++j)
      m.col(j) = b.bracket(x, Vec::Unit(n, j));
    return m;
  };
  // Mean curvature vector: <Z, X> = tr ad X.
  Vec traces(n);
  for (int j = 0; j < n; ++j)
    traces(j) = ad(Vec::Unit(n, j)).trace();
  const Vec z = g.inverse() * traces;

  auto r = [&](const Vec &x) {
    const Mat adx = ad(x);
    double s = -0.5 * (adx * adx).trace();
    for (int i = 0; i < n; ++i) {
      const Vec bx = b.bracket(x, f.col(i));
      s -= 0.5 * inner(bx, bx);
      for (int j = 0; j < n; ++j) {
        const double p = inner(b.bracket(f.col(i), f.col(j)), x);
        s += 0.25 * p * p;
      }
    }
    return s - inner(b.bracket(z, x), x);
  };
  Mat ric(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec ei = Vec::Unit(n, i), ej = Vec::Unit(n, j);
      ric(i, j) = 0.25 * (r(ei + ej) - r(ei - ej));
    }
  return ric;
}

/// Diagonal Ricci tensor of diag(a) on the Milnor algebra
/// [e1,e2] = l0 e0, [e2,e0] = l1 e1, [e0,e1] = l2 e2 (0-based).
inline std::array<double, 3> milnor_diagonal_ricci(const std::array<double, 3> &l,
                                                   const std::array<double, 3> &a) {
  // Orthonormal frame e_i / sqrt(a_i) has constants l_i sqrt(a_i / (a_j a_k)).
  std::array<double, 3> lo{};
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    lo[static_cast<std::size_t>(i)] = l[static_cast<std::size_t>(i)] *
                                      std::sqrt(a[static_cast<std::size_t>(i)] /
                                                (a[static_cast<std::size_t>(j)] *
                                                 a[static_cast<std::size_t>(k)]));
  }
  const double h = 0.5 * (lo[0] + lo[1] + lo[2]);
  const double m0 = h - lo[0], m1 = h - lo[1], m2 = h - lo[2];
  return {2 * m1 * m2 * a[0], 2 * m2 * m0 * a[1], 2 * m0 * m1 * a[2]};
}

/// Unnormalized Ricci flow of diag(a0, b0, b0) on the Heisenberg algebra
/// [e1,e2] = e0: a = a0 s^(-1/3), b = b0 s^(1/3), s = 1 + 3 (a0/b0^2) t.
inline std::array<double, 3> heisenberg_flow(double a0, double b0, double t) {
  const double s = 1.0 + 3.0 * a0 / (b0 * b0) * t;
  const double b = b0 * std::cbrt(s);
  return {a0 / std::cbrt(s), b, b};
}

/// Round su(2) metric g0 = c I with brackets (2,2,2): g(t) = (c - 4t) I.
inline double su2_round_scale(double c, double t) { return c - 4.0 * t; }

/// Eigenvalues 4 pi^2 xi^T G xi of the flat torus with dual metric G, brute
/// force over |xi_i| <= box, each occurrence listed.
inline std::vector<double> torus_values(const Mat &g_inv, int box) {
  const int n = static_cast<int>(g_inv.rows());
  std::vector<double> out;
  std::vector<int> xi(static_cast<std::size_t>(n), -box);
  const double four_pi2 = 4.0 * M_PI * M_PI;
  while (true) {
    Vec v(n);
    for (int i = 0; i < n; ++i)
      v(i) = xi[static_cast<std::size_t>(i)];
    out.push_back(four_pi2 * v.dot(g_inv * v));
    int i = 0;
    while (i < n && xi[static_cast<std::size_t>(i)] == box)
      xi[static_cast<std::size_t>(i++)] = -box;
    if (i == n)
      break;
    ++xi[static_cast<std::size_t>(i)];
  }
  return out;
}

} // namespace oracle
