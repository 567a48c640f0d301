#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "dampol/errors.hpp"
#include "dampol/mesh.hpp"

namespace dampol {

using cplx = std::complex<double>;

/// Trapezoidal sum of sampled values against the mesh weights.
template <typename T>
T integrate(const FrequencyMesh& mesh, const std::vector<T>& f) {
  if (f.size() != mesh.size()) throw validation_error("integrate: size mismatch");
  T acc{};
  for (std::size_t j = 0; j < f.size(); ++j) acc += mesh.weight[j] * f[j];
  return acc;
}

/// PV integral  P int f(w') / (w_p - w') dw'  over the mesh span, where
/// w_p = mesh.omega[p] is a node. The pole is subtracted globally,
///   P int f/(w_p - w') = int (f(w') - f(w_p)) / (w_p - w') + f(w_p) log((w_p-a)/(b-w_p)),
/// and the smooth remainder is integrated with composite Simpson. A pole on
/// the first or last node is handled by tapering the integrand to zero over
/// one virtual cell beyond the span (the mesh span is the spectral support).
template <typename T>
T pv_cauchy(const FrequencyMesh& mesh, const std::vector<T>& f, std::size_t p) {
  const std::size_t n = mesh.size();
  if (f.size() != n) throw validation_error("pv_cauchy: size mismatch");
  if (p >= n) throw validation_error("pv_cauchy: pole index out of range");
  const double d = mesh.spacing();

  std::vector<double> w(mesh.omega);
  std::vector<T> g(f);
  std::size_t pp = p;
  if (p == 0) {
    w.insert(w.begin(), w.front() - d);
    g.insert(g.begin(), T{});
    pp = 1;
  }
  if (p + 1 == n) {
    w.push_back(w.back() + d);
    g.push_back(T{});
  }

  const std::size_t m = w.size();
  const double wp = w[pp];
  std::vector<T> phi(m);
  for (std::size_t k = 0; k < m; ++k)
    if (k != pp) phi[k] = (g[k] - g[pp]) / (wp - w[k]);
  // phi(w_p) = -g'(w_p); fourth-order central where the stencil fits
  if (pp >= 2 && pp + 2 < m)
    phi[pp] = (g[pp + 2] - 8.0 * g[pp + 1] + 8.0 * g[pp - 1] - g[pp - 2]) / (12.0 * d);
  else
    phi[pp] = (g[pp - 1] - g[pp + 1]) / (2.0 * d);

  T acc{};
  std::size_t k = 0;
  while (k + 2 < m) {
    acc += (d / 3.0) * (phi[k] + 4.0 * phi[k + 1] + phi[k + 2]);
    k += 2;
  }
  if (k + 1 < m) acc += (d / 2.0) * (phi[k] + phi[k + 1]);  // odd leftover cell

  acc += g[pp] * std::log((wp - w.front()) / (w.back() - wp));
  return acc;
}

/// PV integral  P int f(w') / (w^2 - w'^2) dw'  with w = mesh.omega[p],
/// reduced to the Cauchy form through g(w') = f(w') / (w + w').
template <typename T>
T pv_square_pole(const FrequencyMesh& mesh, const std::vector<T>& f, std::size_t p) {
  std::vector<T> g(f.size());
  const double wp = mesh.omega[p];
  for (std::size_t j = 0; j < f.size(); ++j) g[j] = f[j] / (wp + mesh.omega[j]);
  return pv_cauchy(mesh, g, p);
}

}  // namespace dampol
