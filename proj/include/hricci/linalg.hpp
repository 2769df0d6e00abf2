#pragma once

// Small dense linear algebra shared by every module. Matrices here are n x n
// with n the Lie algebra dimension (typically 3), so everything is dynamic
// size Eigen and nothing is tuned for large n.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hricci {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A value violates a structural precondition (non-SPD metric, bad dimension).
class InvalidStateError : public Error {
public:
  using Error::Error;
};

/// The requested operation is not defined for this input.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

namespace linalg {

inline double max_abs(const Matrix &m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// |T|^2_g = trace((g^-1 T)^2) for a symmetric bilinear form T.
inline double g_norm_sq(const Matrix &g_inv, const Matrix &t) {
  const Matrix m = g_inv * t;
  return (m * m).trace();
}

inline Matrix symmetrize(const Matrix &m) { return 0.5 * (m + m.transpose()); }

/// Number of independent entries of a symmetric n x n matrix.
inline int packed_size(int n) { return n * (n + 1) / 2; }

/// Row-major upper triangle, the ODE state layout.
inline Vector pack_upper(const Matrix &m) {
  const int n = static_cast<int>(m.rows());
  Vector v(packed_size(n));
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      v(p++) = m(i, j);
  return v;
}

inline Matrix unpack_upper(const Vector &v, int n) {
  Matrix m(n, n);
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      m(i, j) = v(p);
      m(j, i) = v(p);
      ++p;
    }
  return m;
}

/// Eigenvalues of a symmetric matrix, ascending.
inline Vector sym_eigenvalues(const Matrix &m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Eigenvalues of b^-1 a for symmetric a and SPD b, ascending.
inline Vector generalized_eigenvalues(const Matrix &a, const Matrix &b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(symmetrize(a), symmetrize(b),
                                                      Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Row-major flattening, used by serialization.
inline std::vector<double> row_major(const Matrix &m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out.push_back(m(i, j));
  return out;
}

inline Matrix from_row_major(const std::vector<double> &values, int n) {
  if (static_cast<int>(values.size()) != n * n)
    throw InvalidStateError("expected " + std::to_string(n * n) + " matrix entries, got " +
                            std::to_string(values.size()));
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = values[static_cast<std::size_t>(i * n + j)];
  return m;
}

} // namespace linalg
} // namespace hricci
