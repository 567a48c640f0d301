#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dampol/errors.hpp"

namespace dampol {

/// Frequency mesh for the bath label omega' and for frequency sweeps.
/// Uniformly spaced, strictly positive, ascending, with trapezoidal
/// quadrature weights for integrals over [omega.front(), omega.back()].
/// Uniform spacing is required by the principal-value quadrature.
struct FrequencyMesh {
  std::vector<double> omega;
  std::vector<double> weight;

  static FrequencyMesh uniform(double omega_min, double omega_max, std::size_t n) {
    if (n < 4) throw validation_error("FrequencyMesh: need at least 4 points");
    if (!(omega_min > 0.0)) throw validation_error("FrequencyMesh: omega_min must be > 0");
    if (!(omega_max > omega_min)) throw validation_error("FrequencyMesh: omega_max must exceed omega_min");
    FrequencyMesh m;
    m.omega.resize(n);
    m.weight.resize(n);
    const double d = (omega_max - omega_min) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) m.omega[j] = omega_min + d * static_cast<double>(j);
    for (std::size_t j = 0; j < n; ++j) m.weight[j] = d;
    m.weight.front() = 0.5 * d;
    m.weight.back() = 0.5 * d;
    return m;
  }

  std::size_t size() const { return omega.size(); }
  double spacing() const { return omega.size() > 1 ? omega[1] - omega[0] : 0.0; }
  double front() const { return omega.front(); }
  double back() const { return omega.back(); }

  /// Index of a frequency that must coincide with a mesh node (Plemelj
  /// terms are only defined on nodes).
  std::size_t index_of(double w, double tol_cells = 1e-9) const {
    const double d = spacing();
    const double t = (w - omega.front()) / d;
    const long long j = static_cast<long long>(t + 0.5);
    if (j < 0 || static_cast<std::size_t>(j) >= omega.size() ||
        std::abs(t - static_cast<double>(j)) > tol_cells)
      throw validation_error("FrequencyMesh: frequency " + std::to_string(w) +
                             " is not a mesh node");
    return static_cast<std::size_t>(j);
  }

  bool same_as(const FrequencyMesh& o, double tol = 1e-12) const {
    if (omega.size() != o.omega.size()) return false;
    return std::abs(omega.front() - o.omega.front()) < tol &&
           std::abs(omega.back() - o.omega.back()) < tol;
  }
};

}  // namespace dampol
