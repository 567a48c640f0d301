#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dampol/errors.hpp"

namespace dampol {

/// Uniform spatial grid on [x_min, x_max]. Lengths are in units of
/// c/omega_ref, so the vacuum wavenumber at omega equals omega.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_points = 0;

  Grid1D() = default;
  Grid1D(double a, double b, std::size_t n) : x_min(a), x_max(b), n_points(n) {
    if (n_points < 3) throw validation_error("Grid1D: n_points must be >= 3");
    if (!(x_max > x_min)) throw validation_error("Grid1D: x_max must exceed x_min");
  }

  double spacing() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }
  double x(std::size_t i) const { return x_min + spacing() * static_cast<double>(i); }
  std::size_t size() const { return n_points; }

  std::vector<double> nodes() const {
    std::vector<double> out(n_points);
    for (std::size_t i = 0; i < n_points; ++i) out[i] = x(i);
    return out;
  }

  /// Nearest node index; throws if x lies outside the grid by more than half a cell.
  std::size_t index_of(double xq) const {
    const double h = spacing();
    const double t = (xq - x_min) / h;
    const long long i = static_cast<long long>(t + 0.5);
    if (i < 0 || static_cast<std::size_t>(i) >= n_points)
      throw validation_error("Grid1D: coordinate " + std::to_string(xq) + " outside grid");
    return static_cast<std::size_t>(i);
  }

  bool same_as(const Grid1D& o, double tol = 1e-12) const {
    return n_points == o.n_points && std::abs(x_min - o.x_min) < tol &&
           std::abs(x_max - o.x_max) < tol;
  }
};

}  // namespace dampol
