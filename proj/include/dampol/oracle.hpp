#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "dampol/errors.hpp"
#include "dampol/grid.hpp"
#include "dampol/material.hpp"

namespace dampol {
namespace oracle {

/// Bath oscillators per site: frequencies w_m with trapezoidal weights, and
/// site couplings vbar(i, m) = v(x_i, w_m) sqrt(weight_m), so that bath sums
/// approximate the continuum frequency integrals.
struct BathDiscretization {
  Eigen::VectorXd omega;   ///< M bath frequencies, ascending positive
  Eigen::VectorXd weight;  ///< trapezoidal weights
  Eigen::MatrixXd vbar;    ///< N x M

  static BathDiscretization from_bath(const MaterialProfile& profile, const BathModel& bath,
                                      double omega_max, std::size_t m_modes) {
    BathDiscretization d;
    const std::size_t n = profile.size();
    if (m_modes == 0) {
      d.vbar.resize(static_cast<Eigen::Index>(n), 0);
      return d;
    }
    if (m_modes < 2) throw validation_error("BathDiscretization: need at least 2 modes");
    const double w_min = omega_max / static_cast<double>(m_modes);
    const double dw = (omega_max - w_min) / static_cast<double>(m_modes - 1);
    d.omega.resize(static_cast<Eigen::Index>(m_modes));
    d.weight.resize(static_cast<Eigen::Index>(m_modes));
    for (std::size_t m = 0; m < m_modes; ++m) {
      d.omega[static_cast<Eigen::Index>(m)] = w_min + dw * static_cast<double>(m);
      d.weight[static_cast<Eigen::Index>(m)] = dw;
    }
    d.weight[0] *= 0.5;
    d.weight[static_cast<Eigen::Index>(m_modes - 1)] *= 0.5;
    d.vbar.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m_modes));
    if (bath.kind == BathModel::Kind::none) return d;
    if (bath.kind != BathModel::Kind::tabulated)
      throw validation_error("BathDiscretization: tabulated bath required");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < m_modes; ++m) {
        // nearest/linear sample of the tabulated coupling at w_m
        const auto& tm = bath.tab_mesh;
        const double w = d.omega[static_cast<Eigen::Index>(m)];
        double v;
        if (w <= tm.front())
          v = bath.v(static_cast<Eigen::Index>(i), 0);
        else if (w >= tm.back())
          v = bath.v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(tm.size() - 1));
        else {
          const double t = (w - tm.front()) / tm.spacing();
          const Eigen::Index j0 = static_cast<Eigen::Index>(t);
          const double f = t - static_cast<double>(j0);
          v = (1.0 - f) * bath.v(static_cast<Eigen::Index>(i), j0) +
              f * bath.v(static_cast<Eigen::Index>(i), j0 + 1);
        }
        d.vbar(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) =
            v * std::sqrt(d.weight[static_cast<Eigen::Index>(m)]);
      }
    return d;
  }

  std::size_t modes() const { return static_cast<std::size_t>(omega.size()); }
};

enum class BoundaryCondition { dirichlet, periodic };

/// The discretized quadratic Hamiltonian in canonical (sqrt(h)-scaled)
/// variables z = (a, x, y; pi, p, qbar): H = (1/2) z^T M z with the standard
/// symplectic form. Trapezoidal grid weights make the energy agree with the
/// continuum integrand to O(h^2).
struct DiscreteQuadraticModel {
  MaterialProfile profile;
  BathDiscretization bath;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  Eigen::SparseMatrix<double> m_h;
  bool homogeneous = false;

  std::size_t n_sites = 0;
  std::size_t n_bath = 0;

  std::size_t half_dim() const { return n_sites * (2 + n_bath); }
  std::size_t dim() const { return 2 * half_dim(); }

  // canonical slot layout
  std::size_t ia(std::size_t i) const { return i; }
  std::size_t ix(std::size_t i) const { return n_sites + i; }
  std::size_t iy(std::size_t i, std::size_t m) const { return 2 * n_sites + i * n_bath + m; }
  std::size_t ipi(std::size_t i) const { return half_dim() + ia(i); }
  std::size_t ip(std::size_t i) const { return half_dim() + ix(i); }
  std::size_t iq(std::size_t i, std::size_t m) const { return half_dim() + iy(i, m); }

  std::string slot_name(std::size_t s) const {
    const std::size_t n = half_dim();
    const bool mom = s >= n;
    std::size_t c = mom ? s - n : s;
    if (c < n_sites) return (mom ? "Pi[" : "A[") + std::to_string(c) + "]";
    if (c < 2 * n_sites) return (mom ? "P[" : "X[") + std::to_string(c - n_sites) + "]";
    c -= 2 * n_sites;
    return (mom ? "Q[" : "Y[") + std::to_string(c / n_bath) + "," +
           std::to_string(c % n_bath) + "]";
  }
};

/// Report of the positive-definiteness validation.
struct StabilityReport {
  bool positive_definite = false;
  double min_pivot = 0.0;
  std::string worst_slot;
};

inline DiscreteQuadraticModel assemble_hamiltonian(const MaterialProfile& profile,
                                                   const BathDiscretization& bath,
                                                   BoundaryCondition bc,
                                                   std::size_t dim_cap = 20000) {
  DiscreteQuadraticModel model;
  model.profile = profile;
  model.bath = bath;
  model.bc = bc;
  model.n_sites = profile.size();
  model.n_bath = bath.modes();
  if (model.dim() > dim_cap)
    throw validation_error("assemble_hamiltonian: dimension " + std::to_string(model.dim()) +
                           " exceeds the cap " + std::to_string(dim_cap));

  const std::size_t n_sites = model.n_sites;
  const std::size_t m_modes = model.n_bath;
  const double h = profile.grid.spacing();
  const std::size_t dim = model.dim();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(10 * dim);
  auto add = [&](std::size_t r, std::size_t c, double v) {
    if (v == 0.0) return;
    trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    if (r != c) trip.emplace_back(static_cast<int>(c), static_cast<int>(r), v);
  };

  // Photon stiffness from link differences (1 / mu0 h^2); Dirichlet adds the
  // links to phantom zero neighbors outside the grid.
  const double kl = 1.0 / (h * h);
  auto add_link = [&](std::size_t i, std::size_t j) {
    add(model.ia(i), model.ia(i), kl);
    add(model.ia(j), model.ia(j), kl);
    add(model.ia(i), model.ia(j), -kl);
  };
  for (std::size_t i = 0; i + 1 < n_sites; ++i) add_link(i, i + 1);
  if (bc == BoundaryCondition::periodic) {
    add_link(n_sites - 1, 0);
  } else {
    add(model.ia(0), model.ia(0), kl);
    add(model.ia(n_sites - 1), model.ia(n_sites - 1), kl);
  }

  for (std::size_t i = 0; i < n_sites; ++i) {
    const double rho = profile.rho[static_cast<Eigen::Index>(i)];
    const double al = profile.alpha[static_cast<Eigen::Index>(i)];
    const double w0 = profile.omega0[static_cast<Eigen::Index>(i)];
    add(model.ia(i), model.ia(i), al * al / rho);
    add(model.ix(i), model.ix(i), rho * w0 * w0);
    add(model.ipi(i), model.ipi(i), 1.0 / profile.eps0);
    add(model.ip(i), model.ip(i), 1.0 / rho);
    add(model.ia(i), model.ip(i), al / rho);  // A . P coupling
    for (std::size_t m = 0; m < m_modes; ++m) {
      const double wm = bath.omega[static_cast<Eigen::Index>(m)];
      add(model.iy(i, m), model.iy(i, m), rho * wm * wm);
      add(model.iq(i, m), model.iq(i, m), 1.0 / rho);
      add(model.ix(i), model.iq(i, m),
          bath.vbar(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) / rho);
    }
  }

  model.m_h.resize(static_cast<int>(dim), static_cast<int>(dim));
  model.m_h.setFromTriplets(trip.begin(), trip.end());

  bool homog = true;
  for (std::size_t i = 1; i < n_sites && homog; ++i)
    homog = profile.rho[static_cast<Eigen::Index>(i)] == profile.rho[0] &&
            profile.omega0[static_cast<Eigen::Index>(i)] == profile.omega0[0] &&
            profile.alpha[static_cast<Eigen::Index>(i)] == profile.alpha[0] &&
            (m_modes == 0 || (bath.vbar.row(static_cast<Eigen::Index>(i)) -
                              bath.vbar.row(0)).cwiseAbs().maxCoeff() == 0.0);
  model.homogeneous = homog;
  return model;
}

/// Positive definiteness of M_H; on failure names the most negative
/// direction (the admissibility criterion for the omega0 renormalization).
inline StabilityReport validate_stability(const DiscreteQuadraticModel& model) {
  StabilityReport rep;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(model.m_h);
  if (ldlt.info() == Eigen::Success) {
    Eigen::Index loc = 0;
    rep.min_pivot = ldlt.vectorD().minCoeff(&loc);
    rep.positive_definite = rep.min_pivot > 0.0;
    if (rep.positive_definite) return rep;
  }
  // Diagnose the most negative direction for small models.
  if (model.dim() <= 4000) {
    Eigen::MatrixXd dense(model.m_h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    rep.min_pivot = es.eigenvalues().minCoeff();
    rep.positive_definite = rep.min_pivot > 0.0;
    if (!rep.positive_definite) {
      Eigen::Index loc = 0;
      es.eigenvectors().col(0).cwiseAbs().maxCoeff(&loc);
      rep.worst_slot = model.slot_name(static_cast<std::size_t>(loc));
    }
    return rep;
  }
  rep.positive_definite = false;
  rep.worst_slot = "indefinite (factorization-level diagnosis only at this size)";
  return rep;
}

/// Energy through the assembled matrix.
inline double energy_quadratic(const DiscreteQuadraticModel& model, const Eigen::VectorXd& z) {
  return 0.5 * z.dot(model.m_h * z);
}

/// Energy by direct evaluation of the discretized integrand, term by term.
/// Kept independent of the matrix assembly.
inline double energy_direct(const DiscreteQuadraticModel& model, const Eigen::VectorXd& z) {
  const MaterialProfile& p = model.profile;
  const double h = p.grid.spacing();
  const std::size_t n = model.n_sites;
  const std::size_t mm = model.n_bath;
  // unscale to physical field samples
  auto A = [&](std::size_t i) { return z[static_cast<Eigen::Index>(model.ia(i))] / std::sqrt(h); };
  auto X = [&](std::size_t i) { return z[static_cast<Eigen::Index>(model.ix(i))] / std::sqrt(h); };
  auto Pi = [&](std::size_t i) { return z[static_cast<Eigen::Index>(model.ipi(i))] / std::sqrt(h); };
  auto P = [&](std::size_t i) { return z[static_cast<Eigen::Index>(model.ip(i))] / std::sqrt(h); };
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = p.rho[static_cast<Eigen::Index>(i)];
    const double al = p.alpha[static_cast<Eigen::Index>(i)];
    const double w0 = p.omega0[static_cast<Eigen::Index>(i)];
    e += h * (0.5 * Pi(i) * Pi(i) / p.eps0 + 0.5 * P(i) * P(i) / rho +
              0.5 * rho * w0 * w0 * X(i) * X(i) + (al / rho) * A(i) * P(i) +
              0.5 * al * al * A(i) * A(i) / rho);
    for (std::size_t m = 0; m < mm; ++m) {
      const double wm = model.bath.omega[static_cast<Eigen::Index>(m)];
      const double wgt = model.bath.weight[static_cast<Eigen::Index>(m)];
      const double y = z[static_cast<Eigen::Index>(model.iy(i, m))] / std::sqrt(h * wgt);
      const double q = z[static_cast<Eigen::Index>(model.iq(i, m))] / std::sqrt(h * wgt);
      const double v = model.bath.vbar(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(m)) / std::sqrt(wgt);
      e += h * wgt * (0.5 * q * q / rho + 0.5 * rho * wm * wm * y * y + (v / rho) * X(i) * q);
    }
  }
  // (dA/dx)^2 / (2 mu0): link sum, phantom zeros for Dirichlet ends
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = A(i + 1) - A(i);
    e += h * 0.5 * d * d / (h * h);
  }
  if (model.bc == BoundaryCondition::periodic) {
    const double d = A(0) - A(n - 1);
    e += h * 0.5 * d * d / (h * h);
  } else {
    e += h * 0.5 * (A(0) * A(0) + A(n - 1) * A(n - 1)) / (h * h);
  }
  return e;
}

/// Result of the symplectic (Bogoliubov) diagonalization of a quadratic
/// positive-definite Hamiltonian: z = sum_k f_k c_k + h.c. with
/// [c_k, c_l^dag] = hbar delta_kl.
struct BogoliubovModes {
  Eigen::VectorXd omega;     ///< normal frequencies, ascending
  Eigen::MatrixXcd f;        ///< 2n x n mode map columns
  double symplectic_residual = 0.0;
  double max_real_part = 0.0;  ///< spurious real parts of the eigenvalues
};

/// Dense symplectic diagonalization through the eigenproblem of J M.
/// Degenerate frequency clusters are orthonormalized in the M inner
/// product, which restores canonical commutators within each cluster.
inline BogoliubovModes bogoliubov_diagonalize(const Eigen::MatrixXd& m_h,
                                              double degeneracy_tol = 1e-8) {
  const Eigen::Index dim = m_h.rows();
  if (dim % 2 != 0) throw validation_error("bogoliubov_diagonalize: odd dimension");
  const Eigen::Index n = dim / 2;

  Eigen::MatrixXd jm(dim, dim);
  jm.topRows(n) = m_h.bottomRows(n);
  jm.bottomRows(n) = -m_h.topRows(n);

  Eigen::EigenSolver<Eigen::MatrixXd> es(jm);
  if (es.info() != Eigen::Success)
    throw singularity_error("bogoliubov_diagonalize: eigensolver failed");

  struct Mode {
    double omega;
    Eigen::VectorXcd w;
    double re;
  };
  std::vector<Mode> modes;
  double scale = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) scale = std::max(scale, std::abs(es.eigenvalues()[k]));
  for (Eigen::Index k = 0; k < dim; ++k) {
    const cplx lam = es.eigenvalues()[k];
    if (lam.imag() > 1e-12 * scale)
      modes.push_back({lam.imag(), es.eigenvectors().col(k), std::abs(lam.real())});
  }
  if (static_cast<Eigen::Index>(modes.size()) != n)
    throw singularity_error("bogoliubov_diagonalize: defective pencil (" +
                            std::to_string(modes.size()) + " positive modes of " +
                            std::to_string(n) + " expected); is M_H positive definite?");
  std::sort(modes.begin(), modes.end(),
            [](const Mode& a, const Mode& b) { return a.omega < b.omega; });

  BogoliubovModes out;
  out.omega.resize(n);
  out.f.resize(dim, n);
  Eigen::MatrixXcd wmat(dim, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.omega[k] = modes[static_cast<std::size_t>(k)].omega;
    wmat.col(k) = modes[static_cast<std::size_t>(k)].w;
    out.max_real_part =
        std::max(out.max_real_part, modes[static_cast<std::size_t>(k)].re / scale);
  }

  // Degenerate clusters: M-orthonormalize via the Cholesky of the Gram matrix.
  Eigen::Index lo = 0;
  while (lo < n) {
    Eigen::Index hi = lo + 1;
    while (hi < n &&
           out.omega[hi] - out.omega[hi - 1] <= degeneracy_tol * std::max(1.0, out.omega[hi]))
      ++hi;
    const Eigen::Index sz = hi - lo;
    Eigen::MatrixXcd block = wmat.middleCols(lo, sz);
    Eigen::MatrixXcd gram = block.adjoint() * (m_h * block);
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw singularity_error("bogoliubov_diagonalize: degenerate cluster not M-independent");
    wmat.middleCols(lo, sz) =
        llt.matrixL().solve(block.adjoint()).adjoint();  // block * L^{-H}
    lo = hi;
  }
  // scale so that Omega w^H M w = 1
  for (Eigen::Index k = 0; k < n; ++k) {
    const double nrm = std::real(wmat.col(k).dot(m_h * wmat.col(k)));  // w^H M w
    wmat.col(k) /= std::sqrt(out.omega[k] * nrm);
    out.f.col(k) = out.omega[k] * wmat.col(k).conjugate();
  }

  // canonical-commutator residual through u_k = M w_k
  Eigen::MatrixXcd u = m_h * wmat;
  Eigen::MatrixXcd ju(dim, n);
  ju.topRows(n) = u.bottomRows(n);
  ju.bottomRows(n) = -u.topRows(n);
  Eigen::MatrixXcd c1 = cplx(0.0, 1.0) * (u.transpose() * ju.conjugate());
  Eigen::MatrixXcd c2 = u.transpose() * ju;
  out.symplectic_residual =
      std::max((c1 - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff(),
               c2.cwiseAbs().maxCoeff());
  return out;
}

inline BogoliubovModes normal_modes(const DiscreteQuadraticModel& model,
                                    std::size_t dense_cap = 2600) {
  if (model.dim() > dense_cap)
    throw validation_error("normal_modes: dimension " + std::to_string(model.dim()) +
                           " above the dense-eigensolver cap " + std::to_string(dense_cap) +
                           "; use the homogeneous-periodic correlation path instead");
  StabilityReport stab = validate_stability(model);
  if (!stab.positive_definite)
    throw validation_error("normal_modes: M_H not positive definite; most negative direction " +
                           stab.worst_slot);
  return bogoliubov_diagonalize(Eigen::MatrixXd(model.m_h));
}

/// Steady-state amplitude under a monochromatic transverse current drive
/// j(x) e^{-i w t} added to the Pi equation of motion. The frequency may be
/// complex (Im w > 0 applies Lorentzian smoothing of the discrete spectrum).
/// Returns the complex E(x) amplitude.
inline Eigen::VectorXcd classical_response(const DiscreteQuadraticModel& model,
                                           const Eigen::VectorXcd& j_drive, cplx omega) {
  const std::size_t n = model.n_sites;
  if (j_drive.size() != static_cast<Eigen::Index>(n))
    throw validation_error("classical_response: drive not sized to the grid");
  const double h = model.profile.grid.spacing();
  const std::size_t dim = model.dim();
  const Eigen::Index half = static_cast<Eigen::Index>(model.half_dim());

  // (J M + i w I) zeta = -b
  Eigen::SparseMatrix<double> m = model.m_h;
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(m.nonZeros()) + dim);
  for (int kcol = 0; kcol < m.outerSize(); ++kcol)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, kcol); it; ++it) {
      const Eigen::Index r = it.row();
      // J M: top rows take M's bottom rows, bottom rows take -M's top rows.
      if (r >= half)
        trip.emplace_back(static_cast<int>(r - half), static_cast<int>(it.col()),
                          cplx(it.value(), 0.0));
      else
        trip.emplace_back(static_cast<int>(r + half), static_cast<int>(it.col()),
                          cplx(-it.value(), 0.0));
    }
  for (std::size_t d = 0; d < dim; ++d)
    trip.emplace_back(static_cast<int>(d), static_cast<int>(d), cplx(0.0, 1.0) * omega);
  Eigen::SparseMatrix<cplx> sys(static_cast<int>(dim), static_cast<int>(dim));
  sys.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i)
    b[static_cast<Eigen::Index>(model.ipi(i))] = j_drive[static_cast<Eigen::Index>(i)] * std::sqrt(h);

  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu(sys);
  if (lu.info() != Eigen::Success)
    throw singularity_error("classical_response: singular steady-state system");
  Eigen::VectorXcd zeta = lu.solve(-b);
  if (!zeta.allFinite() || zeta.cwiseAbs().maxCoeff() > 1e12 * b.cwiseAbs().maxCoeff())
    throw singularity_error("classical_response: drive at an undamped resonance");

  Eigen::VectorXcd e_out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    e_out[static_cast<Eigen::Index>(i)] =
        -zeta[static_cast<Eigen::Index>(model.ipi(i))] / (model.profile.eps0 * std::sqrt(h));
  return e_out;
}

namespace detail {

/// Per-momentum-sector block Hamiltonian of a homogeneous periodic model:
/// coordinates (a, x, y_m), with photon stiffness kappa.
inline Eigen::MatrixXd fourier_block(const DiscreteQuadraticModel& model, double kappa) {
  const MaterialProfile& p = model.profile;
  const std::size_t mm = model.n_bath;
  const Eigen::Index q = static_cast<Eigen::Index>(2 + mm);
  const double rho = p.rho[0];
  const double al = p.alpha[0];
  const double w0 = p.omega0[0];
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * q, 2 * q);
  m(0, 0) = kappa + al * al / rho;
  m(1, 1) = rho * w0 * w0;
  m(q + 0, q + 0) = 1.0 / p.eps0;
  m(q + 1, q + 1) = 1.0 / rho;
  m(0, q + 1) = m(q + 1, 0) = al / rho;
  for (std::size_t b = 0; b < mm; ++b) {
    const Eigen::Index yi = 2 + static_cast<Eigen::Index>(b);
    const double wm = model.bath.omega[static_cast<Eigen::Index>(b)];
    m(yi, yi) = rho * wm * wm;
    m(q + yi, q + yi) = 1.0 / rho;
    m(1, q + yi) = m(q + yi, 1) = model.bath.vbar(0, static_cast<Eigen::Index>(b)) / rho;
  }
  return m;
}

}  // namespace detail

/// Equal-time vacuum correlation <0| E(x_i) E(x_j) |0> with an optional
/// spectral window W(Omega) applied per normal mode (the coarse-graining
/// used when comparing against continuum formulas). Homogeneous periodic
/// models use the exact momentum-sector decomposition; general models go
/// through the dense diagonalization.
inline Eigen::MatrixXd vacuum_ee_correlation(
    const DiscreteQuadraticModel& model,
    const std::function<double(double)>& window = nullptr,
    std::size_t dense_cap = 2600) {
  const std::size_t n = model.n_sites;
  const double h = model.profile.grid.spacing();
  const double hbar = model.profile.hbar;
  const double e2h = model.profile.eps0 * model.profile.eps0 * h;

  if (model.homogeneous && model.bc == BoundaryCondition::periodic) {
    std::vector<double> pw(n / 2 + 1, 0.0);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      const double s = std::sin(M_PI * static_cast<double>(k) / static_cast<double>(n));
      const double kappa = 4.0 * s * s / (h * h);
      BogoliubovModes bm = bogoliubov_diagonalize(detail::fourier_block(model, kappa));
      const Eigen::Index q = static_cast<Eigen::Index>(2 + model.n_bath);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < bm.omega.size(); ++j) {
        const double w = window ? window(bm.omega[j]) : 1.0;
        acc += hbar * w * std::norm(bm.f(q + 0, j));  // pi slot
      }
      pw[k] = acc;
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = static_cast<double>(i) - static_cast<double>(j);
        double acc = pw[0];
        for (std::size_t k = 1; k < n / 2 + (n % 2 == 0 ? 0 : 1); ++k)
          acc += 2.0 * std::cos(2.0 * M_PI * static_cast<double>(k) * d / static_cast<double>(n)) *
                 pw[k];
        if (n % 2 == 0)
          acc += std::cos(M_PI * d) * pw[n / 2];
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            acc / (static_cast<double>(n) * e2h);
      }
    return out;
  }

  BogoliubovModes bm = normal_modes(model, dense_cap);
  const Eigen::Index half = static_cast<Eigen::Index>(model.half_dim());
  Eigen::MatrixXcd fpi(static_cast<Eigen::Index>(n), bm.omega.size());
  for (std::size_t i = 0; i < n; ++i)
    fpi.row(static_cast<Eigen::Index>(i)) = bm.f.row(half + static_cast<Eigen::Index>(i));
  Eigen::VectorXd wv(bm.omega.size());
  for (Eigen::Index k = 0; k < bm.omega.size(); ++k)
    wv[k] = window ? window(bm.omega[k]) : 1.0;
  Eigen::MatrixXcd cov = fpi * wv.cast<cplx>().asDiagonal() * fpi.adjoint();
  return hbar * cov.real() / e2h;
}

}  // namespace oracle
}  // namespace dampol
