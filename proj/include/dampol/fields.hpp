#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "dampol/errors.hpp"
#include "dampol/greenfn.hpp"
#include "dampol/modes.hpp"

namespace dampol {

/// Spectral kernel of a Heisenberg field: the field at x is
///   F(x, t) = int dx' int dw e^{-i w t} K(x, x'; w) C(x', w) + h.c.
struct FieldKernel {
  enum class Field { E, D };
  Field field = Field::E;
  double omega = 0.0;
  Eigen::MatrixXcd k;           ///< grid delta of the local term folded in as 1/h
  Eigen::VectorXcd local_diag;  ///< local (non-propagating) term, zero for E
};

/// K_E(x, x'; w) = -i mu0 w G(x, x'; w) n(x', w).
inline FieldKernel efield_kernel(const GreenSolution& g, const NoiseAmplitude& noise) {
  if (std::abs(g.omega - noise.omega) > 1e-12)
    throw validation_error("efield_kernel: frequency mismatch");
  FieldKernel out;
  out.field = FieldKernel::Field::E;
  out.omega = g.omega;
  out.k = cplx(0.0, -1.0) * g.omega * (g.g * noise.n.cast<cplx>().asDiagonal());
  out.local_diag = Eigen::VectorXcd::Zero(g.g.rows());
  return out;
}

/// K_D(x, x'; w) = -(i/c^2) w [1 + chi(x, w)] G(x, x'; w) n(x', w)
///                 + (i/w) n(x, w) delta(x - x').
inline FieldKernel dfield_kernel(const GreenSolution& g, const SusceptibilityTable& chi,
                                 const NoiseAmplitude& noise, std::size_t j) {
  if (std::abs(g.omega - chi.mesh.omega[j]) > 1e-12)
    throw validation_error("dfield_kernel: frequency mismatch");
  const Eigen::Index n = g.g.rows();
  const double h = g.grid.spacing();
  FieldKernel out;
  out.field = FieldKernel::Field::D;
  out.omega = g.omega;
  Eigen::VectorXcd eps_row = chi.chi.col(static_cast<Eigen::Index>(j)).array() + 1.0;
  out.k = cplx(0.0, -1.0) * g.omega *
          (eps_row.asDiagonal() * g.g * noise.n.cast<cplx>().asDiagonal());
  out.local_diag = cplx(0.0, 1.0 / g.omega) * noise.n.cast<cplx>();
  out.k.diagonal() += out.local_diag / h;
  return out;
}

/// Per-frequency data for correlation diagnostics at a list of observation
/// nodes: M(x, x'; w) = h sum_x'' K_E(x, x'') K_E^*(x', x'') and Im G(x, x').
struct EFieldSweep {
  FrequencyMesh mesh;
  std::vector<Eigen::Index> points;
  std::vector<Eigen::MatrixXcd> m;     ///< per mesh node, points x points
  std::vector<Eigen::MatrixXd> im_g;   ///< per mesh node, points x points
  double hbar = 1.0;
};

/// Builds the sweep through a Green-function provider (mesh index -> G).
template <typename GProvider>
EFieldSweep build_efield_sweep(const MaterialProfile& profile, const SusceptibilityTable& chi,
                               GProvider&& gp, std::vector<Eigen::Index> points) {
  EFieldSweep sweep;
  sweep.mesh = chi.mesh;
  sweep.points = std::move(points);
  sweep.hbar = profile.hbar;
  const double h = profile.grid.spacing();
  const std::size_t np = sweep.points.size();
  sweep.m.resize(chi.mesh.size());
  sweep.im_g.resize(chi.mesh.size());
  for (std::size_t j = 0; j < chi.mesh.size(); ++j) {
    const GreenSolution& g = gp(j);
    const NoiseAmplitude noise = build_noise(profile, chi, j);
    Eigen::MatrixXcd rows(np, g.g.cols());
    for (std::size_t p = 0; p < np; ++p)
      rows.row(static_cast<Eigen::Index>(p)) =
          cplx(0.0, -1.0) * g.omega *
          (g.g.row(sweep.points[p]).array() * noise.n.transpose().cast<cplx>().array()).matrix();
    sweep.m[j] = h * (rows * rows.adjoint());
    sweep.im_g[j].resize(np, np);
    for (std::size_t p = 0; p < np; ++p)
      for (std::size_t q = 0; q < np; ++q)
        sweep.im_g[j](static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
            g.g(sweep.points[p], sweep.points[q]).imag();
  }
  return sweep;
}

/// Two-route vacuum correlation <0| E(x, t) E(x', t') |0> over tau = t - t'.
/// Route (i) integrates the kernel product directly; route (ii) replaces the
/// absorption integral by -Im G through the Green identity (the sign follows
/// the G(x,x) = 1/(2ik) convention, which makes -Im G >= 0).
struct CorrelationResult {
  std::vector<double> tau;
  std::vector<cplx> direct;
  std::vector<cplx> via_im_g;
  double route_agreement = 0.0;     ///< max relative difference over tau
  bool truncation_warning = false;
  double truncation_ratio = 0.0;    ///< integrand at mesh end over its peak
};

inline CorrelationResult vacuum_correlation_E(const EFieldSweep& sweep, std::size_t pa,
                                              std::size_t pb, const std::vector<double>& taus) {
  CorrelationResult out;
  out.tau = taus;
  const std::size_t nj = sweep.mesh.size();
  std::vector<cplx> m_ab(nj), s_ab(nj);
  double peak = 0.0;
  for (std::size_t j = 0; j < nj; ++j) {
    const double w = sweep.mesh.omega[j];
    m_ab[j] = sweep.m[j](static_cast<Eigen::Index>(pa), static_cast<Eigen::Index>(pb));
    s_ab[j] = (sweep.hbar / M_PI) * w * w *
              (-sweep.im_g[j](static_cast<Eigen::Index>(pa), static_cast<Eigen::Index>(pb)));
    peak = std::max(peak, std::abs(m_ab[j]));
  }
  out.truncation_ratio = peak > 0.0 ? std::abs(m_ab[nj - 1]) / peak : 0.0;
  out.truncation_warning = out.truncation_ratio > 1e-4;

  out.direct.resize(taus.size());
  out.via_im_g.resize(taus.size());
  double max_rel = 0.0;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    cplx acc1(0.0, 0.0), acc2(0.0, 0.0);
    for (std::size_t j = 0; j < nj; ++j) {
      const cplx ph = std::exp(cplx(0.0, -sweep.mesh.omega[j] * taus[t]));
      acc1 += sweep.mesh.weight[j] * ph * m_ab[j];
      acc2 += sweep.mesh.weight[j] * ph * s_ab[j];
    }
    out.direct[t] = acc1;
    out.via_im_g[t] = acc2;
    const double scale = std::max(std::abs(acc1), std::abs(acc2));
    if (scale > 0.0) max_rel = std::max(max_rel, std::abs(acc1 - acc2) / scale);
  }
  out.route_agreement = max_rel;
  return out;
}

/// Equal-time commutator diagnostic: [E(x), E(x')] = 2i int dw Im M(x, x'; w)
/// must vanish. Returns the max norm relative to the fluctuation scale
/// max_x <E(x)^2>.
struct CommutatorResidual {
  double residual = 0.0;
  double scale = 0.0;
};

inline CommutatorResidual equal_time_commutator_residual(const EFieldSweep& sweep) {
  const std::size_t np = sweep.points.size();
  const std::size_t nj = sweep.mesh.size();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np),
                                              static_cast<Eigen::Index>(np));
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(np));
  for (std::size_t j = 0; j < nj; ++j) {
    acc += sweep.mesh.weight[j] * sweep.m[j].imag();
    diag += sweep.mesh.weight[j] * sweep.m[j].real().diagonal();
  }
  CommutatorResidual out;
  out.scale = diag.maxCoeff();
  out.residual = 2.0 * acc.cwiseAbs().maxCoeff() / out.scale;
  return out;
}

}  // namespace dampol
