#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dampol/errors.hpp"
#include "dampol/grid.hpp"
#include "dampol/material.hpp"

namespace dampol {

/// Retarded branch of the medium wavenumber k = (w/c) sqrt(eps):
/// Im k >= 0 always, Re k > 0 for transparent media.
inline cplx medium_wavenumber(cplx eps, double omega) {
  if (eps == cplx(0.0, 0.0)) throw singularity_error("medium_wavenumber: eps = 0 (degenerate)");
  cplx k = omega * std::sqrt(eps);
  if (k.imag() < 0.0) k = -k;
  if (k.imag() == 0.0 && k.real() < 0.0) k = -k;
  return k;
}

/// Complex permittivity eps(x) = 1 + chi(x, w) at one fixed frequency.
struct DielectricResponse {
  Grid1D grid;
  double omega = 0.0;
  Eigen::VectorXcd eps;
  enum class Boundary { vacuum, absorbing_cladding };
  Boundary boundary = Boundary::vacuum;

  static DielectricResponse from_chi(const SusceptibilityTable& chi, std::size_t j) {
    DielectricResponse d;
    d.grid = chi.grid;
    d.omega = chi.mesh.omega[j];
    d.eps = chi.chi.col(static_cast<Eigen::Index>(j)).array() + 1.0;
    return d;
  }

  void validate() const {
    if (eps.size() != static_cast<Eigen::Index>(grid.size()))
      throw validation_error("DielectricResponse: eps not sized to the grid");
    for (Eigen::Index i = 0; i < eps.size(); ++i)
      if (eps[i].imag() < -1e-14)
        throw validation_error("DielectricResponse: Im eps < 0 (gain) at node " +
                               std::to_string(i));
  }
};

/// Piecewise-constant stack at one frequency.
struct Layer {
  double thickness = 0.0;
  cplx eps{1.0, 0.0};
};

struct LayerStack {
  std::vector<Layer> layers;

  LayerStack() = default;
  explicit LayerStack(std::vector<Layer> ls) : layers(std::move(ls)) {
    if (layers.empty()) throw validation_error("LayerStack: at least one layer required");
    for (const auto& l : layers)
      if (!(l.thickness > 0.0)) throw validation_error("LayerStack: thickness must be > 0");
  }

  double total_thickness() const {
    double t = 0.0;
    for (const auto& l : layers) t += l.thickness;
    return t;
  }

  /// eps at position x measured from the left edge of the stack.
  cplx eps_at(double x) const {
    double acc = 0.0;
    for (const auto& l : layers) {
      acc += l.thickness;
      if (x < acc) return l.eps;
    }
    return layers.back().eps;
  }

  /// Sample onto a grid spanning the stack (stack aligned to the grid).
  /// Nodes sitting on an interface take the mean of the adjacent layers,
  /// which keeps the second-difference stencil second-order there.
  DielectricResponse sample(const Grid1D& grid, double omega) const {
    if (std::abs(grid.x_max - grid.x_min - total_thickness()) > 1e-9 * total_thickness())
      throw validation_error("LayerStack: grid span does not match the stack");
    DielectricResponse d;
    d.grid = grid;
    d.omega = omega;
    d.eps.resize(static_cast<Eigen::Index>(grid.size()));
    const double h = grid.spacing();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.x(i) - grid.x_min;
      double acc = 0.0;
      bool on_interface = false;
      for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        acc += layers[l].thickness;
        if (std::abs(x - acc) < 1e-9 * h) {
          d.eps[static_cast<Eigen::Index>(i)] = 0.5 * (layers[l].eps + layers[l + 1].eps);
          on_interface = true;
          break;
        }
      }
      if (!on_interface) d.eps[static_cast<Eigen::Index>(i)] = eps_at(x);
    }
    return d;
  }
};

enum class GreenSolver { analytic, transfer_matrix, finite_difference };

/// Dense kernel G(x_i, x_j; w) of the 1D wave equation
///   d^2 G / dx^2 + (w^2/c^2) eps(x) G = delta(x - x'),
/// with outgoing boundary conditions. The delta is represented on the grid
/// as 1/h at the source node.
struct GreenSolution {
  Grid1D grid;
  double omega = 0.0;
  Eigen::MatrixXcd g;
  GreenSolver solver = GreenSolver::finite_difference;
  std::string boundary = "outgoing";
  double points_per_wavelength = 0.0;
  bool underresolved_warning = false;

  double reciprocity_residual() const {
    return (g - g.transpose()).cwiseAbs().maxCoeff();
  }
};

/// Green function of a homogeneous medium: G = exp(i k |x - x'|) / (2 i k).
inline cplx green_homogeneous(cplx eps, double omega, double x, double xp) {
  const cplx k = medium_wavenumber(eps, omega);
  return std::exp(cplx(0.0, 1.0) * k * std::abs(x - xp)) / (cplx(0.0, 2.0) * k);
}

namespace detail {

/// Value and derivative of a homogeneous solution propagated a distance d
/// in a layer with wavenumber k.
inline void propagate(cplx k, double d, cplx& u, cplx& du) {
  const cplx c = std::cos(k * d);
  const cplx s = std::sin(k * d);
  const cplx u_new = u * c + du * s / k;
  const cplx du_new = -u * k * s + du * c;
  u = u_new;
  du = du_new;
}

}  // namespace detail

/// Transfer-matrix Green function for a piecewise-constant stack: the two
/// outgoing-normalized homogeneous solutions u+ (rightgoing at the right
/// edge) and u- (leftgoing at the left edge) combine as
///   G(x, x') = u+(x_>) u-(x_<) / W,
/// with W the constant Wronskian u- u+' - u-' u+.
inline GreenSolution green_multilayer(const LayerStack& stack, double omega, const Grid1D& grid) {
  const std::size_t n = grid.size();
  const double x0 = grid.x_min;

  std::vector<cplx> um(n), dum(n), up(n), dup(n);
  // u-: start at the left edge as exp(-i k (x - x0)), march right.
  {
    cplx u(1.0, 0.0);
    cplx du = -cplx(0.0, 1.0) * medium_wavenumber(stack.eps_at(0.0), omega);
    um[0] = u;
    dum[0] = du;
    for (std::size_t i = 1; i < n; ++i) {
      const double xm = 0.5 * (grid.x(i - 1) + grid.x(i)) - x0;  // cell midpoint picks the layer
      const cplx k = medium_wavenumber(stack.eps_at(xm), omega);
      detail::propagate(k, grid.spacing(), u, du);
      um[i] = u;
      dum[i] = du;
    }
  }
  // u+: start at the right edge as exp(+i k (x - x_end)), march left.
  {
    cplx u(1.0, 0.0);
    cplx du = cplx(0.0, 1.0) * medium_wavenumber(stack.eps_at(stack.total_thickness() - 1e-15), omega);
    up[n - 1] = u;
    dup[n - 1] = du;
    for (std::size_t ii = n - 1; ii > 0; --ii) {
      const std::size_t i = ii - 1;
      const double xm = 0.5 * (grid.x(i) + grid.x(i + 1)) - x0;
      const cplx k = medium_wavenumber(stack.eps_at(xm), omega);
      detail::propagate(k, -grid.spacing(), u, du);
      up[i] = u;
      dup[i] = du;
    }
  }

  // Wronskian, checked for constancy across the grid.
  cplx wr = um[0] * dup[0] - dum[0] * up[0];
  double wr_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    wr_scale = std::max(wr_scale, std::abs(um[i] * dup[i]) + std::abs(dum[i] * up[i]));
  if (std::abs(wr) < 1e-12 * wr_scale)
    throw singularity_error("green_multilayer: vanishing Wronskian at omega = " +
                            std::to_string(omega) + " (resonance of a lossless stack)");

  GreenSolution sol;
  sol.grid = grid;
  sol.omega = omega;
  sol.solver = GreenSolver::transfer_matrix;
  sol.g.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const cplx val = up[i] * um[j] / wr;  // i >= j: x_> = x_i
      sol.g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = val;
      sol.g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = val;
    }

  double kmax = 0.0;
  for (const auto& l : stack.layers)
    kmax = std::max(kmax, std::abs(medium_wavenumber(l.eps, omega).real()));
  sol.points_per_wavelength = kmax > 0.0 ? 2.0 * M_PI / (kmax * grid.spacing()) : 1e300;
  return sol;
}

/// Discrete wave operator A = L0 + D + (w^2/c^2) diag(eps): the centered
/// second-difference stencil with outgoing one-sided closures that impose
/// exact exp(i k h) propagation with the local k at each end. A is complex
/// symmetric; its inverse (scaled by 1/h) is the discrete Green kernel.
inline Eigen::MatrixXcd wave_operator(const DielectricResponse& eps) {
  const Eigen::Index n = static_cast<Eigen::Index>(eps.grid.size());
  const double h = eps.grid.spacing();
  const double w = eps.omega;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = -2.0 / (h * h) + w * w * eps.eps[i];
    if (i > 0) a(i, i - 1) = 1.0 / (h * h);
    if (i + 1 < n) a(i, i + 1) = 1.0 / (h * h);
  }
  const cplx kl = medium_wavenumber(eps.eps[0], w);
  const cplx kr = medium_wavenumber(eps.eps[n - 1], w);
  a(0, 0) += std::exp(cplx(0.0, 1.0) * kl * h) / (h * h);
  a(n - 1, n - 1) += std::exp(cplx(0.0, 1.0) * kr * h) / (h * h);
  return a;
}

/// Pure second-difference part of the wave operator (outgoing closures
/// included, the eps term excluded). Used by the mode-coefficient checks.
inline Eigen::MatrixXcd laplacian_operator(const DielectricResponse& eps) {
  Eigen::MatrixXcd l = wave_operator(eps);
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    l(i, i) -= eps.omega * eps.omega * eps.eps[i];
  return l;
}

/// Solves the discrete wave equation for selected source columns.
inline Eigen::MatrixXcd green_fd_columns(const DielectricResponse& eps,
                                         const std::vector<std::size_t>& cols) {
  eps.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(eps.grid.size());
  const double h = eps.grid.spacing();
  Eigen::MatrixXcd a = wave_operator(eps);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    rhs(static_cast<Eigen::Index>(cols[c]), static_cast<Eigen::Index>(c)) = 1.0 / h;
  Eigen::MatrixXcd g = lu.solve(rhs);
  if (!g.allFinite()) throw singularity_error("green_fd: singular linear system");
  return g;
}

/// Finite-difference Green function: all columns of the inverse discrete
/// wave operator. Discrete reciprocity is exact because the operator is
/// complex symmetric.
inline GreenSolution green_fd(const DielectricResponse& eps) {
  eps.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(eps.grid.size());
  const double h = eps.grid.spacing();
  GreenSolution sol;
  sol.grid = eps.grid;
  sol.omega = eps.omega;
  sol.solver = GreenSolver::finite_difference;

  Eigen::MatrixXcd a = wave_operator(eps);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  sol.g = lu.solve(Eigen::MatrixXcd::Identity(n, n) * (1.0 / h));
  if (!sol.g.allFinite()) throw singularity_error("green_fd: singular linear system");
  // Symmetrize away the LU roundoff so reciprocity is exact downstream.
  sol.g = 0.5 * (sol.g + sol.g.transpose()).eval();

  double kmax = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    kmax = std::max(kmax, std::abs(medium_wavenumber(eps.eps[i], eps.omega).real()));
  sol.points_per_wavelength = kmax > 0.0 ? 2.0 * M_PI / (kmax * h) : 1e300;
  sol.underresolved_warning = sol.points_per_wavelength < 20.0;
  return sol;
}

/// Residual of the defining equation: applying the discrete wave operator
/// to each column must reproduce the grid delta.
inline double wave_equation_residual(const GreenSolution& g, const DielectricResponse& eps) {
  const Eigen::Index n = g.g.rows();
  const double h = g.grid.spacing();
  Eigen::MatrixXcd a = wave_operator(eps);
  Eigen::MatrixXcd r = a * g.g - Eigen::MatrixXcd::Identity(n, n) * (1.0 / h);
  return r.cwiseAbs().maxCoeff() * h;  // relative to the delta magnitude 1/h
}

/// Green-identity diagnostic. With this sign convention (G(x,x) = 1/(2ik))
/// the exact discrete statement is
///   Im G(x,x') + (w^2/c^2) h [G diag(Im eps) G*](x,x') - flux(x,x') = 0,
/// where the flux collects the outgoing-closure boundary terms.
struct GreenIdentityReport {
  double residual = 0.0;        ///< max |identity| / max |Im G|, over the core block
  double flux_max = 0.0;        ///< max |flux| / max |Im G|, over the core block
  double volume_max = 0.0;      ///< max |volume term| / max |Im G|
  bool surface_dominated = false;  ///< lossless bulk: identity carried by the flux
};

/// core_fraction restricts the reported residual and flux to grid points at
/// least that fraction away from each end (the physical region inside an
/// absorbing cladding); 0 evaluates the whole kernel.
inline GreenIdentityReport green_identity_residual(const GreenSolution& g,
                                                   const DielectricResponse& eps,
                                                   double core_fraction = 0.0) {
  if (std::abs(g.omega - eps.omega) > 1e-12)
    throw validation_error("green_identity_residual: G and eps frequencies differ");
  const Eigen::Index n = g.g.rows();
  const double h = g.grid.spacing();
  const double w = g.omega;

  Eigen::VectorXd im_eps = eps.eps.imag();
  Eigen::MatrixXcd gc = g.g.conjugate();
  Eigen::MatrixXcd volume = (w * w * h) * (g.g * im_eps.asDiagonal() * gc);

  // Boundary closure flux: (h / 2i) G (conj(D) - D) G*.
  const cplx kl = medium_wavenumber(eps.eps[0], w);
  const cplx kr = medium_wavenumber(eps.eps[n - 1], w);
  const cplx dl = std::exp(cplx(0.0, 1.0) * kl * h) / (h * h);
  const cplx dr = std::exp(cplx(0.0, 1.0) * kr * h) / (h * h);
  const cplx cl = (std::conj(dl) - dl) * (h / cplx(0.0, 2.0));
  const cplx cr = (std::conj(dr) - dr) * (h / cplx(0.0, 2.0));
  Eigen::MatrixXcd flux = cl * (g.g.col(0) * gc.row(0)) + cr * (g.g.col(n - 1) * gc.row(n - 1));

  Eigen::MatrixXcd ident = g.g.imag().cast<cplx>() + volume - flux;
  const double scale = g.g.imag().cwiseAbs().maxCoeff();

  Eigen::Index lo = 0, len = n;
  if (core_fraction > 0.0 && core_fraction < 0.5) {
    lo = static_cast<Eigen::Index>(core_fraction * static_cast<double>(n));
    len = n - 2 * lo;
  }
  GreenIdentityReport rep;
  rep.residual = ident.block(lo, lo, len, len).cwiseAbs().maxCoeff() / scale;
  rep.flux_max = flux.block(lo, lo, len, len).cwiseAbs().maxCoeff() / scale;
  rep.volume_max = volume.cwiseAbs().maxCoeff() / scale;
  rep.surface_dominated = im_eps.cwiseAbs().maxCoeff() < 1e-14;
  return rep;
}

}  // namespace dampol
