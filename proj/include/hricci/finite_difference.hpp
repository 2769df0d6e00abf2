#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

namespace hricci::fd {

/// Second-order three-point derivative at interior index k of a possibly
/// non-uniform grid.
inline double centered(std::span<const double> t, std::span<const double> f, std::size_t k) {
  if (k == 0 || k + 1 >= t.size())
    throw std::out_of_range("centered difference needs an interior index");
  const double h1 = t[k] - t[k - 1];
  const double h2 = t[k + 1] - t[k];
  // Weighted one-sided quotients; exact (zero) on constant data.
  const double left = (f[k] - f[k - 1]) / h1;
  const double right = (f[k + 1] - f[k]) / h2;
  return (h2 * left + h1 * right) / (h1 + h2);
}

} // namespace hricci::fd
