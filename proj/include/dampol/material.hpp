#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>
#include <vector>

#include "dampol/errors.hpp"
#include "dampol/grid.hpp"
#include "dampol/mesh.hpp"
#include "dampol/parallel.hpp"
#include "dampol/quadrature.hpp"

namespace dampol {

/// Dielectric parameters on the spatial grid. Internal units fix
/// hbar = c = eps0 = mu0 = 1; frequencies are multiples of omega_ref and
/// lengths multiples of c/omega_ref. Points with alpha = 0 are vacuum:
/// the susceptibility is identically zero there and no mode labels are
/// admitted.
struct MaterialProfile {
  Grid1D grid;
  Eigen::VectorXd rho;     ///< mass density, > 0
  Eigen::VectorXd omega0;  ///< renormalized oscillator eigenfrequency, >= 0
  Eigen::VectorXd alpha;   ///< polarization coupling, >= 0 (0 marks vacuum)
  double eps0 = 1.0;
  double hbar = 1.0;

  MaterialProfile() = default;
  MaterialProfile(Grid1D g, Eigen::VectorXd rho_, Eigen::VectorXd omega0_, Eigen::VectorXd alpha_)
      : grid(g), rho(std::move(rho_)), omega0(std::move(omega0_)), alpha(std::move(alpha_)) {
    validate();
  }

  static MaterialProfile homogeneous(Grid1D g, double rho_, double omega0_, double alpha_) {
    const Eigen::Index n = static_cast<Eigen::Index>(g.size());
    return MaterialProfile(g, Eigen::VectorXd::Constant(n, rho_),
                           Eigen::VectorXd::Constant(n, omega0_),
                           Eigen::VectorXd::Constant(n, alpha_));
  }

  void validate() const {
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    if (rho.size() != n || omega0.size() != n || alpha.size() != n)
      throw validation_error("MaterialProfile: arrays not sized to the grid");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(rho[i] > 0.0))
        throw validation_error("MaterialProfile: rho must be positive (node " +
                               std::to_string(i) + ")");
      if (omega0[i] < 0.0) throw validation_error("MaterialProfile: omega0 must be >= 0");
      if (alpha[i] < 0.0) throw validation_error("MaterialProfile: alpha must be >= 0");
    }
  }

  std::size_t size() const { return grid.size(); }
  bool is_vacuum(Eigen::Index i) const { return alpha[i] == 0.0; }
};

/// Bath spectral coupling v_omega(x). Either tabulated on grid x mesh or a
/// Drude-Lorentz preset with target chi = omega_p^2 / (omega0^2 - w^2 - i gamma w).
struct BathModel {
  enum class Kind { none, tabulated, drude_lorentz };
  Kind kind = Kind::none;

  // tabulated: v(i, j) >= 0 on grid node i, mesh node j.
  Eigen::MatrixXd v;
  FrequencyMesh tab_mesh;

  // drude_lorentz preset, per grid node.
  Eigen::VectorXd omega_p;
  Eigen::VectorXd gamma;

  static BathModel none() { return BathModel{}; }

  static BathModel tabulated(Eigen::MatrixXd values, FrequencyMesh mesh) {
    BathModel b;
    b.kind = Kind::tabulated;
    b.v = std::move(values);
    b.tab_mesh = std::move(mesh);
    if (b.v.cols() != static_cast<Eigen::Index>(b.tab_mesh.size()))
      throw validation_error("BathModel: v table columns must match the mesh");
    if ((b.v.array() < 0.0).any()) throw validation_error("BathModel: v must be >= 0");
    return b;
  }

  static BathModel drude_lorentz(Eigen::VectorXd omega_p_, Eigen::VectorXd gamma_) {
    BathModel b;
    b.kind = Kind::drude_lorentz;
    b.omega_p = std::move(omega_p_);
    b.gamma = std::move(gamma_);
    for (Eigen::Index i = 0; i < b.gamma.size(); ++i)
      if (!(b.gamma[i] > 0.0)) throw validation_error("BathModel: gamma must be > 0");
    return b;
  }

  /// Coupling value at (node i, mesh node j), interpolated linearly in
  /// frequency if the table lives on a different (possibly coarser) mesh.
  double v_at(Eigen::Index i, const FrequencyMesh& mesh, std::size_t j) const {
    if (kind != Kind::tabulated) return 0.0;
    if (tab_mesh.same_as(mesh)) return v(i, static_cast<Eigen::Index>(j));
    const double w = mesh.omega[j];
    const double d = tab_mesh.spacing();
    double t = (w - tab_mesh.front()) / d;
    if (t <= 0.0) return v(i, 0);
    const Eigen::Index last = v.cols() - 1;
    if (t >= static_cast<double>(last)) return v(i, last);
    const Eigen::Index j0 = static_cast<Eigen::Index>(t);
    const double f = t - static_cast<double>(j0);
    return (1.0 - f) * v(i, j0) + f * v(i, j0 + 1);
  }
};

/// chi(x_i, omega_j) with provenance.
struct SusceptibilityTable {
  Grid1D grid;
  FrequencyMesh mesh;
  Eigen::MatrixXcd chi;  ///< rows: grid nodes, cols: mesh nodes
  enum class Provenance { computed_from_bath, preset_closed_form, lossless_closed_form };
  Provenance provenance = Provenance::computed_from_bath;

  cplx at(Eigen::Index i, std::size_t j) const { return chi(i, static_cast<Eigen::Index>(j)); }
};

namespace detail {

/// Row of bath samples v(x_i, omega'_k) on a mesh.
inline std::vector<double> bath_row(const MaterialProfile& profile, const BathModel& bath,
                                    const FrequencyMesh& mesh, Eigen::Index i) {
  std::vector<double> row(mesh.size(), 0.0);
  if (bath.kind == BathModel::Kind::tabulated && !profile.is_vacuum(i))
    for (std::size_t k = 0; k < mesh.size(); ++k) row[k] = bath.v_at(i, mesh, k);
  return row;
}

}  // namespace detail

/// Full complex bath integral W(x_i, omega_j) =
///   int dw' w'^2 v^2 / ((w + i0)^2 - w'^2)
/// evaluated on the mesh: principal value by pole-cell subtraction plus the
/// Plemelj term -i pi w v_w^2 / 2.
inline cplx bath_integral_W(const MaterialProfile& profile, const BathModel& bath,
                            const FrequencyMesh& mesh, Eigen::Index i, std::size_t j) {
  if (bath.kind != BathModel::Kind::tabulated) return cplx(0.0, 0.0);
  const std::vector<double> vrow = detail::bath_row(profile, bath, mesh, i);
  std::vector<double> f(mesh.size());
  for (std::size_t k = 0; k < mesh.size(); ++k)
    f[k] = mesh.omega[k] * mesh.omega[k] * vrow[k] * vrow[k];
  const double w = mesh.omega[j];
  const double pv = pv_square_pole(mesh, f, j);
  const double vw = vrow[j];
  return cplx(pv, -0.5 * M_PI * w * vw * vw);
}

/// Susceptibility at a complex frequency z (Im z > 0) for a tabulated bath:
/// no pole prescription is needed off the real axis; the bath integral is a
/// plain trapezoidal sum. Used by oracle comparisons and fixtures.
inline cplx chi_complex_freq(const MaterialProfile& profile, const BathModel& bath,
                             const FrequencyMesh& mesh, Eigen::Index i, cplx z) {
  if (profile.is_vacuum(i)) return cplx(0.0, 0.0);
  cplx W(0.0, 0.0);
  if (bath.kind == BathModel::Kind::tabulated) {
    const std::vector<double> vrow = detail::bath_row(profile, bath, mesh, i);
    const cplx z2 = z * z;
    for (std::size_t k = 0; k < mesh.size(); ++k) {
      const double wk = mesh.omega[k];
      W += mesh.weight[k] * wk * wk * vrow[k] * vrow[k] / (z2 - wk * wk);
    }
  }
  const double r = profile.rho[i];
  const cplx denom = z * z - profile.omega0[i] * profile.omega0[i] - W / (r * r);
  return -(profile.alpha[i] * profile.alpha[i] / (profile.eps0 * r)) / denom;
}

/// Position- and frequency-dependent susceptibility.
///
/// For a tabulated bath the denominator is
///   w^2 - omega0^2 - (1/rho^2) [ PV integral - i pi w v_w^2 / 2 ],
/// which yields Im chi >= 0 for w > 0. For the Drude-Lorentz preset the
/// closed form is returned directly; with no bath the lossless Lorentz
/// oscillator results.
inline SusceptibilityTable compute_chi(const MaterialProfile& profile, const BathModel& bath,
                                       const FrequencyMesh& mesh, unsigned n_threads = 1) {
  if (bath.kind == BathModel::Kind::tabulated && !bath.tab_mesh.same_as(mesh) &&
      bath.tab_mesh.back() < mesh.back() - 1e-12)
    throw validation_error("compute_chi: bath table does not span the requested mesh");

  SusceptibilityTable table;
  table.grid = profile.grid;
  table.mesh = mesh;
  const Eigen::Index n = static_cast<Eigen::Index>(profile.size());
  const Eigen::Index m = static_cast<Eigen::Index>(mesh.size());
  table.chi.setZero(n, m);

  switch (bath.kind) {
    case BathModel::Kind::none:
      table.provenance = SusceptibilityTable::Provenance::lossless_closed_form;
      break;
    case BathModel::Kind::drude_lorentz:
      table.provenance = SusceptibilityTable::Provenance::preset_closed_form;
      break;
    case BathModel::Kind::tabulated:
      table.provenance = SusceptibilityTable::Provenance::computed_from_bath;
      break;
  }

  // Identical material rows share one susceptibility computation.
  std::vector<Eigen::Index> rep(n);
  std::vector<Eigen::Index> uniq;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index found = -1;
    for (Eigen::Index u : uniq) {
      const bool same_mat = profile.rho[i] == profile.rho[u] &&
                            profile.omega0[i] == profile.omega0[u] &&
                            profile.alpha[i] == profile.alpha[u];
      bool same_bath = true;
      if (bath.kind == BathModel::Kind::tabulated)
        same_bath = (bath.v.row(i) - bath.v.row(u)).cwiseAbs().maxCoeff() == 0.0;
      else if (bath.kind == BathModel::Kind::drude_lorentz)
        same_bath = bath.omega_p[i] == bath.omega_p[u] && bath.gamma[i] == bath.gamma[u];
      if (same_mat && same_bath) {
        found = u;
        break;
      }
    }
    rep[i] = found >= 0 ? found : i;
    if (found < 0) uniq.push_back(i);
  }

  std::string first_error;
  std::mutex err_mutex;
  parallel_for(uniq.size(), n_threads, [&](std::size_t ui) {
    const Eigen::Index i = uniq[ui];
    if (profile.is_vacuum(i)) return;  // chi stays 0 in vacuum
    try {
      const double a2 = profile.alpha[i] * profile.alpha[i];
      const double r = profile.rho[i];
      const double w0sq = profile.omega0[i] * profile.omega0[i];
      if (bath.kind == BathModel::Kind::drude_lorentz) {
        const double wp2 = bath.omega_p[i] * bath.omega_p[i];
        const double g = bath.gamma[i];
        for (Eigen::Index j = 0; j < m; ++j) {
          const double w = mesh.omega[static_cast<std::size_t>(j)];
          table.chi(i, j) = wp2 / cplx(w0sq - w * w, -g * w);
        }
        return;
      }
      std::vector<double> f(mesh.size(), 0.0);
      std::vector<double> vrow;
      if (bath.kind == BathModel::Kind::tabulated) {
        vrow = detail::bath_row(profile, bath, mesh, i);
        for (std::size_t k = 0; k < mesh.size(); ++k)
          f[k] = mesh.omega[k] * mesh.omega[k] * vrow[k] * vrow[k];
      }
      for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        const double w = mesh.omega[js];
        cplx W(0.0, 0.0);
        if (bath.kind == BathModel::Kind::tabulated) {
          const double pv = pv_square_pole(mesh, f, js);
          W = cplx(pv, -0.5 * M_PI * w * vrow[js] * vrow[js]);
        }
        const cplx denom = w * w - w0sq - W / (r * r);
        const double scale = std::max({w * w, w0sq, 1.0});
        if (std::abs(denom) < 1e-14 * scale)
          throw singularity_error("compute_chi: undamped resonance at x = " +
                                  std::to_string(profile.grid.x(static_cast<std::size_t>(i))) +
                                  ", omega = " + std::to_string(w));
        table.chi(i, j) = -(a2 / (profile.eps0 * r)) / denom;
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (first_error.empty()) first_error = e.what();
    }
  });
  if (!first_error.empty()) throw singularity_error(first_error);

  for (Eigen::Index i = 0; i < n; ++i)
    if (rep[i] != i) table.chi.row(i) = table.chi.row(rep[i]);
  return table;
}

/// Inverts the absorption relation for the bath coupling:
///   v_w = alpha * sqrt(2 rho Im chi / (pi eps0 w)) / |chi|.
/// Requires absorption at the requested point.
inline double recover_coupling(const SusceptibilityTable& chi, const MaterialProfile& profile,
                               Eigen::Index i, std::size_t j) {
  if (profile.is_vacuum(i))
    throw lossless_point_error("recover_coupling: vacuum point (alpha = 0) at node " +
                               std::to_string(i));
  const cplx c = chi.at(i, j);
  const double im = c.imag();
  if (!(im > 0.0))
    throw lossless_point_error("recover_coupling: Im chi <= 0 at x = " +
                               std::to_string(profile.grid.x(static_cast<std::size_t>(i))) +
                               ", omega = " + std::to_string(chi.mesh.omega[j]));
  const double w = chi.mesh.omega[j];
  return profile.alpha[i] *
         std::sqrt(2.0 * profile.rho[i] * im / (M_PI * profile.eps0 * w)) / std::abs(c);
}

/// Result of the Kramers-Kronig consistency check at one grid node.
struct KramersKronigResult {
  double residual = 0.0;         ///< max_j |Re chi - Hilbert[Im chi]|
  double tail_bound = 0.0;       ///< estimated truncation of the transform
  bool not_applicable = false;   ///< Im chi == 0 on the whole mesh
  bool truncation_warning = false;
};

/// Checks Re chi(w) = (2/pi) P int w' Im chi(w') / (w'^2 - w^2) dw' on the
/// mesh interior. The tail beyond the mesh is estimated assuming
/// Im chi ~ C / w^3 matched at the mesh end.
inline KramersKronigResult kramers_kronig_residual(const SusceptibilityTable& chi,
                                                   Eigen::Index i) {
  const FrequencyMesh& mesh = chi.mesh;
  KramersKronigResult out;
  std::vector<double> im(mesh.size());
  double max_abs = 0.0, max_im = 0.0;
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    im[j] = chi.at(i, j).imag();
    max_abs = std::max(max_abs, std::abs(chi.at(i, j)));
    max_im = std::max(max_im, std::abs(im[j]));
  }
  if (max_im == 0.0) {
    out.not_applicable = true;
    return out;
  }
  const double wmax = mesh.back();
  if (std::abs(chi.at(i, mesh.size() - 1)) > 1e-3 * max_abs) out.truncation_warning = true;
  const double c_tail = std::abs(im.back()) * wmax * wmax * wmax;
  out.tail_bound = (2.0 / M_PI) * c_tail / (3.0 * wmax * wmax * wmax);

  std::vector<double> f(mesh.size());
  for (std::size_t k = 0; k < mesh.size(); ++k) f[k] = mesh.omega[k] * im[k];
  for (std::size_t j = 1; j + 1 < mesh.size(); ++j) {
    // (2/pi) P int w' Im chi / (w'^2 - w^2) = -(2/pi) P int f / (w^2 - w'^2)
    const double ht = -(2.0 / M_PI) * pv_square_pole(mesh, f, j);
    out.residual = std::max(out.residual, std::abs(chi.at(i, j).real() - ht));
  }
  return out;
}

/// Realizes a target susceptibility table as a tabulated bath: the coupling
/// follows from the absorption identity and omega0 is renormalized so that
/// the truncated bath integral reproduces the target at a reference mesh
/// node (by default the absorption peak, which keeps the truncation
/// mismatch away from the physics). Returns the bath and overwrites
/// profile.omega0 with the renormalized values. The target must be
/// absorbing on the whole mesh at every non-vacuum node.
inline BathModel bath_from_target_chi(MaterialProfile& profile, const SusceptibilityTable& target,
                                      std::size_t j_ref = static_cast<std::size_t>(-1)) {
  const Eigen::Index n = static_cast<Eigen::Index>(profile.size());
  const FrequencyMesh& mesh = target.mesh;
  if (j_ref == static_cast<std::size_t>(-1)) {
    double best = -1.0;
    for (std::size_t j = 0; j < mesh.size(); ++j) {
      double peak = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) peak = std::max(peak, target.at(i, j).imag());
      if (peak > best) {
        best = peak;
        j_ref = j;
      }
    }
  }
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(mesh.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (profile.is_vacuum(i)) continue;
    for (std::size_t j = 0; j < mesh.size(); ++j) {
      const cplx c = target.at(i, j);
      if (!(c.imag() > 0.0))
        throw lossless_point_error("bath_from_target_chi: target not absorbing at node " +
                                   std::to_string(i) + ", mesh index " + std::to_string(j));
      v(i, static_cast<Eigen::Index>(j)) =
          profile.alpha[i] *
          std::sqrt(2.0 * profile.rho[i] * c.imag() / (M_PI * profile.eps0 * mesh.omega[j])) /
          std::abs(c);
    }
  }
  BathModel bath = BathModel::tabulated(std::move(v), mesh);

  // Renormalize omega0: match Re of the Eq.-style denominator at j_ref.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (profile.is_vacuum(i)) continue;
    const double w = mesh.omega[j_ref];
    const double r = profile.rho[i];
    const cplx W = bath_integral_W(profile, bath, mesh, i, j_ref);
    const cplx b_target =
        -(profile.alpha[i] * profile.alpha[i] / (profile.eps0 * r)) / target.at(i, j_ref);
    const double w0sq = w * w - W.real() / (r * r) - b_target.real();
    if (w0sq < 0.0)
      throw validation_error("bath_from_target_chi: negative renormalized omega0^2 at node " +
                             std::to_string(i));
    profile.omega0[i] = std::sqrt(w0sq);
  }
  return bath;
}

/// Drude-Lorentz closed form chi = wp^2 / (w0^2 - w^2 - i g w).
inline cplx drude_lorentz_chi(double wp, double w0, double g, double w) {
  return wp * wp / cplx(w0 * w0 - w * w, -g * w);
}

}  // namespace dampol
