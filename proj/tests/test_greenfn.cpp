#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <functional>

#include "dampol/greenfn.hpp"

using namespace dampol;

namespace {

DielectricResponse make_eps(const Grid1D& grid, double omega,
                            const std::function<cplx(double)>& fn) {
  DielectricResponse d;
  d.grid = grid;
  d.omega = omega;
  d.eps.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i)
    d.eps[static_cast<Eigen::Index>(i)] = fn(grid.x(i));
  return d;
}

/// Absorbing cladding: strongly lossy outer fraction, core eps inside.
DielectricResponse cladded(const Grid1D& grid, double omega, cplx core, cplx clad,
                           double fraction = 0.25) {
  const double a = grid.x_min + fraction * (grid.x_max - grid.x_min);
  const double b = grid.x_max - fraction * (grid.x_max - grid.x_min);
  return make_eps(grid, omega, [&](double x) { return (x < a || x > b) ? clad : core; });
}

}  // namespace

TEST_CASE("homogeneous Green function closed form") {
  SECTION("coincident points: G = -i/2 at k = 1") {
    REQUIRE(std::abs(green_homogeneous(cplx(1.0, 0.0), 1.0, 3.0, 3.0) - cplx(0.0, -0.5)) < 1e-15);
  }
  SECTION("phase advance pi flips the sign: G = +i/2") {
    REQUIRE(std::abs(green_homogeneous(cplx(1.0, 0.0), 1.0, 0.0, M_PI) - cplx(0.0, 0.5)) < 1e-14);
  }
  SECTION("degenerate medium refuses") {
    REQUIRE_THROWS_AS(green_homogeneous(cplx(0.0, 0.0), 1.0, 0.0, 1.0), singularity_error);
  }
  SECTION("retarded branch: decay rate is Im k") {
    const cplx eps(2.0, 0.5);
    const cplx k = medium_wavenumber(eps, 1.0);
    REQUIRE(k.imag() > 0.0);
    const double d1 = 2.0, d2 = 5.0;
    const double ratio = std::abs(green_homogeneous(eps, 1.0, 0.0, d2)) /
                         std::abs(green_homogeneous(eps, 1.0, 0.0, d1));
    REQUIRE(std::abs(std::log(ratio) + k.imag() * (d2 - d1)) < 1e-12);
  }
}

TEST_CASE("transfer-matrix solver") {
  Grid1D grid(0.0, 12.0, 481);
  const double w = 1.3;

  SECTION("single layer reproduces the homogeneous closed form") {
    LayerStack stack({{12.0, cplx(1.7, 0.2)}});
    GreenSolution sol = green_multilayer(stack, w, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); i += 7)
      for (std::size_t j = 0; j < grid.size(); j += 11)
        worst = std::max(worst, std::abs(sol.g(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j)) -
                                         green_homogeneous(cplx(1.7, 0.2), w, grid.x(i), grid.x(j))));
    REQUIRE(worst < 1e-12);
  }

  SECTION("two-layer lossless slab: continuity and unit derivative jump") {
    Grid1D fine(0.0, 12.0, 4801);
    LayerStack stack({{6.0, cplx(1.0, 0.0)}, {6.0, cplx(2.25, 0.0)}});
    GreenSolution sol = green_multilayer(stack, w, fine);
    const double h = fine.spacing();
    const Eigen::Index iface = static_cast<Eigen::Index>(fine.index_of(6.0));
    const Eigen::Index src = static_cast<Eigen::Index>(fine.index_of(3.0));
    // continuous across the interface
    REQUIRE(std::abs(sol.g(iface + 1, src) - sol.g(iface, src)) < 2.0 * h);
    // derivative jump 1 at the source
    const cplx up = (sol.g(src + 1, src) - sol.g(src, src)) / h;
    const cplx dn = (sol.g(src, src) - sol.g(src - 1, src)) / h;
    REQUIRE(std::abs((up - dn) - cplx(1.0, 0.0)) < 1e-2);
  }

  SECTION("three-layer absorbing stack is reciprocal to 1e-10") {
    LayerStack stack({{4.0, cplx(1.0, 0.1)}, {4.0, cplx(2.0, 0.8)}, {4.0, cplx(1.5, 0.3)}});
    GreenSolution sol = green_multilayer(stack, w, grid);
    REQUIRE(sol.reciprocity_residual() < 1e-10);
    REQUIRE(sol.solver == GreenSolver::transfer_matrix);
  }

  SECTION("defining equation holds on the grid") {
    LayerStack stack({{12.0, cplx(1.4, 0.3)}});
    GreenSolution sol = green_multilayer(stack, w, grid);
    DielectricResponse eps = make_eps(grid, w, [](double) { return cplx(1.4, 0.3); });
    // stencil truncation only: O(h^2) relative to the grid delta
    REQUIRE(wave_equation_residual(sol, eps) < 5e-3);
  }
}

TEST_CASE("finite-difference solver") {
  SECTION("uniform medium: convergence order 2.0 +- 0.1 against the closed form") {
    const double w = 1.0;
    std::vector<double> errs;
    for (std::size_t n : {101, 201, 401}) {
      Grid1D grid(0.0, 20.0, n);
      DielectricResponse eps = make_eps(grid, w, [](double) { return cplx(1.0, 0.02); });
      GreenSolution sol = green_fd(eps);
      double worst = 0.0;
      const std::size_t stride = (n - 1) / 20;
      for (std::size_t i = 0; i < n; i += stride)
        for (std::size_t j = 0; j < n; j += stride)
          worst = std::max(worst, std::abs(sol.g(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j)) -
                                           green_homogeneous(cplx(1.0, 0.02), w, grid.x(i),
                                                             grid.x(j))));
      errs.push_back(worst);
    }
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    REQUIRE(order1 == Catch::Approx(2.0).margin(0.1));
    REQUIRE(order2 == Catch::Approx(2.0).margin(0.1));
  }

  SECTION("smooth lossless Gaussian bump: reciprocity at roundoff") {
    Grid1D grid(0.0, 20.0, 301);
    DielectricResponse eps = make_eps(grid, 1.1, [](double x) {
      return cplx(1.0 + 0.8 * std::exp(-(x - 10.0) * (x - 10.0) / 4.0), 0.0);
    });
    GreenSolution sol = green_fd(eps);
    REQUIRE(sol.reciprocity_residual() < 1e-9);
    REQUIRE(wave_equation_residual(sol, eps) < 1e-12);
  }

  SECTION("absorption shifts every operator eigenvalue off the real axis") {
    Grid1D grid(0.0, 10.0, 61);
    DielectricResponse eps = make_eps(grid, 1.0, [](double) { return cplx(1.5, 0.4); });
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(wave_operator(eps));
    REQUIRE(es.eigenvalues().imag().cwiseAbs().minCoeff() > 1e-6);
  }

  SECTION("cross-solver agreement with the analytic kernel at 1e-6") {
    const double w = 1.0;
    const cplx epsv(2.0, 0.5);
    Grid1D grid(0.0, 8.0, 6401);
    DielectricResponse eps = make_eps(grid, w, [&](double) { return epsv; });
    const std::size_t src = grid.index_of(4.0);
    Eigen::MatrixXcd cols = green_fd_columns(eps, {src});
    double worst = 0.0;
    for (std::size_t i = grid.index_of(2.0); i <= grid.index_of(6.0); i += 40)
      worst = std::max(worst, std::abs(cols(static_cast<Eigen::Index>(i), 0) -
                                       green_homogeneous(epsv, w, grid.x(i), grid.x(src))));
    REQUIRE(worst < 1e-6);
  }

  SECTION("under-resolved grids carry a warning") {
    Grid1D grid(0.0, 60.0, 41);
    DielectricResponse eps = make_eps(grid, 2.0, [](double) { return cplx(1.0, 0.01); });
    GreenSolution sol = green_fd(eps);
    REQUIRE(sol.underresolved_warning);
    REQUIRE(sol.points_per_wavelength < 20.0);
  }
}

TEST_CASE("green identity") {
  const double w = 2.0;
  Grid1D grid(0.0, 40.0, 401);

  SECTION("absorbing cladding: discrete identity exact, flux tiny") {
    DielectricResponse eps = cladded(grid, w, cplx(1.5, 0.4), cplx(2.0, 2.0), 0.3);
    GreenSolution sol = green_fd(eps);
    GreenIdentityReport rep = green_identity_residual(sol, eps, 0.35);
    REQUIRE(rep.residual < 1e-6);
    REQUIRE(rep.flux_max < 1e-8);
    REQUIRE_FALSE(rep.surface_dominated);
  }

  SECTION("lossless transparent medium: identity carried by the flux") {
    DielectricResponse eps = make_eps(grid, w, [](double) { return cplx(1.0, 0.0); });
    GreenSolution sol = green_fd(eps);
    GreenIdentityReport rep = green_identity_residual(sol, eps);
    REQUIRE(rep.surface_dominated);
    REQUIRE(rep.volume_max < 1e-14);
    REQUIRE(rep.flux_max > 0.1);  // the whole identity lives in the flux
    REQUIRE(rep.residual < 1e-10);
  }

  SECTION("corrupted kernel is detected") {
    DielectricResponse eps = cladded(grid, w, cplx(1.5, 0.4), cplx(2.0, 2.0), 0.3);
    GreenSolution sol = green_fd(eps);
    sol.g.col(200).setZero();
    sol.g.row(200).setZero();
    GreenIdentityReport rep = green_identity_residual(sol, eps, 0.35);
    REQUIRE(rep.residual > 1e-2);
  }
}

TEST_CASE("transfer-matrix and finite-difference kernels agree at O(h^2)") {
  const double w = 1.2;
  std::vector<double> errs;
  for (std::size_t n : {241, 481}) {  // interfaces on nodes
    Grid1D grid(0.0, 12.0, n);
    LayerStack stack({{4.0, cplx(1.0, 0.05)}, {4.0, cplx(2.0, 0.6)}, {4.0, cplx(1.5, 0.2)}});
    GreenSolution tm = green_multilayer(stack, w, grid);
    GreenSolution fd = green_fd(stack.sample(grid, w));
    errs.push_back((tm.g - fd.g).cwiseAbs().maxCoeff() / tm.g.cwiseAbs().maxCoeff());
  }
  REQUIRE(errs[1] < errs[0] / 3.0);  // second-order refinement
  REQUIRE(errs[1] < 2e-3);
}
