#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "dampol/fields.hpp"

using namespace dampol;

namespace {

/// Absorbing medium with a resonant cladding, bath-consistent chi, and a
/// cached Green sweep over the mesh.
struct FieldFixture {
  Grid1D grid{0.0, 30.0, 161};
  FrequencyMesh mesh = FrequencyMesh::uniform(6.0 / 900.0, 6.0, 900);
  MaterialProfile profile;
  BathModel bath;
  SusceptibilityTable chi;
  std::vector<GreenSolution> sols;

  FieldFixture() {
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd rho = Eigen::VectorXd::Constant(n, 1.0);
    Eigen::VectorXd w0(n), al(n), wp(n), gm(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = grid.x(static_cast<std::size_t>(i));
      const bool clad = x < 9.0 || x > 21.0;
      // Drude-like cladding absorbs across the whole band
      wp[i] = clad ? 4.2 : 1.0;
      gm[i] = clad ? 1.5 : 0.4;
      w0[i] = clad ? 0.3 : 1.0;
      al[i] = wp[i];
    }
    profile = MaterialProfile(grid, rho, w0, al);
    auto preset = BathModel::drude_lorentz(wp, gm);
    SusceptibilityTable target = compute_chi(profile, preset, mesh);
    bath = bath_from_target_chi(profile, target);
    chi = compute_chi(profile, bath, mesh);
    sols.resize(mesh.size());
    for (std::size_t j = 0; j < mesh.size(); ++j)
      sols[j] = green_fd(DielectricResponse::from_chi(chi, j));
  }

  EFieldSweep sweep(std::vector<Eigen::Index> pts) const {
    return build_efield_sweep(profile, chi,
                              [&](std::size_t j) -> const GreenSolution& { return sols[j]; },
                              std::move(pts));
  }
};

FieldFixture& fixture() {
  static FieldFixture fx;
  return fx;
}

}  // namespace

TEST_CASE("electric-field kernel") {
  FieldFixture& fx = fixture();
  const std::size_t j = fx.mesh.index_of(2.0);

  SECTION("no noise without absorption") {
    // a lossless table: kernel columns vanish wherever Im chi = 0
    SusceptibilityTable t = fx.chi;
    t.chi.row(40) = t.chi.row(40).real().cast<cplx>();
    NoiseAmplitude noise = build_noise(fx.profile, t, j);
    FieldKernel k = efield_kernel(fx.sols[j], noise);
    REQUIRE(k.k.col(40).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(k.k.col(80).cwiseAbs().maxCoeff() > 0.0);
  }

  SECTION("hbar -> 4 hbar doubles the kernel") {
    MaterialProfile p4 = fx.profile;
    p4.hbar = 4.0;
    NoiseAmplitude n1 = build_noise(fx.profile, fx.chi, j);
    NoiseAmplitude n4 = build_noise(p4, fx.chi, j);
    FieldKernel k1 = efield_kernel(fx.sols[j], n1);
    FieldKernel k4 = efield_kernel(fx.sols[j], n4);
    REQUIRE((k4.k - 2.0 * k1.k).cwiseAbs().maxCoeff() <= 1e-14 * k1.k.cwiseAbs().maxCoeff());
  }

  SECTION("swap symmetry through reciprocity") {
    // G is symmetric, so K_E(x, x') n(x) = K_E(x', x) n(x') entrywise and
    // the kernel magnitude is swap-symmetric wherever n is uniform
    NoiseAmplitude noise = build_noise(fx.profile, fx.chi, j);
    FieldKernel k = efield_kernel(fx.sols[j], noise);
    double worst = 0.0;
    for (Eigen::Index a = 50; a < 110; a += 9)
      for (Eigen::Index b = 52; b < 110; b += 7) {
        const cplx lhs = k.k(a, b) * noise.n[a];
        const cplx rhs = k.k(b, a) * noise.n[b];
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    REQUIRE(worst < 1e-12);
  }
}

TEST_CASE("displacement-field kernel") {
  FieldFixture& fx = fixture();
  const std::size_t j = fx.mesh.index_of(2.0);

  SECTION("local term lives only where absorption lives") {
    NoiseAmplitude noise = build_noise(fx.profile, fx.chi, j);
    FieldKernel kd = dfield_kernel(fx.sols[j], fx.chi, noise, j);
    for (Eigen::Index i = 0; i < kd.local_diag.size(); i += 13) {
      if (fx.chi.at(i, j).imag() > 0.0)
        REQUIRE(std::abs(kd.local_diag[i]) > 0.0);
      else
        REQUIRE(std::abs(kd.local_diag[i]) == 0.0);
    }
  }

  SECTION("vacuum observation point: D = eps0 E") {
    Grid1D grid(0.0, 12.0, 97);
    const Eigen::Index n = 97;
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(n, 1.0);
    for (Eigen::Index i = 0; i < 24; ++i) alpha[i] = 0.0;  // vacuum window
    MaterialProfile prof(grid, Eigen::VectorXd::Constant(n, 1.0),
                         Eigen::VectorXd::Constant(n, 1.0), alpha);
    auto mesh = FrequencyMesh::uniform(0.02, 4.0, 200);
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(n, 200, 0.4);
    for (Eigen::Index i = 0; i < 24; ++i) v.row(i).setZero();
    auto bath = BathModel::tabulated(v, mesh);
    auto chi = compute_chi(prof, bath, mesh);
    const std::size_t jj = mesh.index_of(2.0, 0.51);
    GreenSolution g = green_fd(DielectricResponse::from_chi(chi, jj));
    NoiseAmplitude noise = build_noise(prof, chi, jj);
    FieldKernel ke = efield_kernel(g, noise);
    FieldKernel kd = dfield_kernel(g, chi, noise, jj);
    // rows in the vacuum window: D kernel equals eps0 * E kernel
    REQUIRE((kd.k.topRows(24) - prof.eps0 * ke.k.topRows(24)).cwiseAbs().maxCoeff() <
            1e-14 * ke.k.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("vacuum correlation function") {
  FieldFixture& fx = fixture();
  const Eigen::Index ia = static_cast<Eigen::Index>(fx.grid.index_of(13.0));
  const Eigen::Index ib = static_cast<Eigen::Index>(fx.grid.index_of(17.0));
  EFieldSweep sw = fx.sweep({ia, ib});

  SECTION("equal-point equal-time value is real and positive") {
    CorrelationResult c = vacuum_correlation_E(sw, 0, 0, {0.0});
    REQUIRE(c.direct[0].real() > 0.0);
    REQUIRE(std::abs(c.direct[0].imag()) <= 1e-15 * c.direct[0].real());
  }

  SECTION("the two routes agree inside the cladding") {
    std::vector<double> taus = {0.0, 1.0, 3.0, 7.0};
    CorrelationResult c = vacuum_correlation_E(sw, 0, 1, taus);
    REQUIRE(c.route_agreement < 1e-4);
  }

  SECTION("hermiticity under swap and time reversal") {
    std::vector<double> taus = {0.4, 2.2, 5.0};
    std::vector<double> negs = {-0.4, -2.2, -5.0};
    CorrelationResult fwd = vacuum_correlation_E(sw, 0, 1, taus);
    CorrelationResult rev = vacuum_correlation_E(sw, 1, 0, negs);
    for (std::size_t t = 0; t < taus.size(); ++t) {
      REQUIRE(std::abs(fwd.direct[t] - std::conj(rev.direct[t])) <
              1e-12 * std::abs(fwd.direct[t]));
    }
  }

  SECTION("truncation diagnostics") {
    CorrelationResult c = vacuum_correlation_E(sw, 0, 1, {0.0});
    REQUIRE(c.truncation_ratio >= 0.0);
    // free-field tail of the direct integrand does not decay: flagged
    REQUIRE(c.truncation_warning == (c.truncation_ratio > 1e-4));
  }
}

TEST_CASE("equal-time commutator") {
  FieldFixture& fx = fixture();

  SECTION("vanishes relative to the fluctuation scale") {
    EFieldSweep sw = fx.sweep({static_cast<Eigen::Index>(fx.grid.index_of(12.0)),
                               static_cast<Eigen::Index>(fx.grid.index_of(15.0)),
                               static_cast<Eigen::Index>(fx.grid.index_of(18.0))});
    CommutatorResidual r = equal_time_commutator_residual(sw);
    REQUIRE(r.scale > 0.0);
    REQUIRE(r.residual < 1e-6);
  }

  SECTION("coincident points vanish exactly by antisymmetry") {
    EFieldSweep sw = fx.sweep({static_cast<Eigen::Index>(fx.grid.index_of(15.0))});
    CommutatorResidual r = equal_time_commutator_residual(sw);
    REQUIRE(r.residual <= 1e-14);
  }

  SECTION("single-frequency truncation without a cladding is the negative control") {
    // weakly absorbing, no cladding: the boundary flux is O(1) per frequency
    // and a narrow mesh provides no phase averaging to cancel it
    Grid1D grid(0.0, 40.0, 161);
    auto narrow = FrequencyMesh::uniform(1.98, 2.01, 4);
    const Eigen::Index n = 161;
    auto prof = MaterialProfile::homogeneous(grid, 1.0, 1.0, 0.6);
    SusceptibilityTable t;
    t.grid = grid;
    t.mesh = narrow;
    t.chi.resize(n, 4);
    for (std::size_t j = 0; j < 4; ++j) {
      const double w = narrow.omega[j];
      for (Eigen::Index i = 0; i < n; ++i)
        t.chi(i, static_cast<Eigen::Index>(j)) = drude_lorentz_chi(0.6, 1.0, 0.15, w);
    }
    std::vector<GreenSolution> sols(4);
    for (std::size_t j = 0; j < 4; ++j)
      sols[j] = green_fd(DielectricResponse::from_chi(t, j));
    EFieldSweep sw = build_efield_sweep(
        prof, t, [&](std::size_t j) -> const GreenSolution& { return sols[j]; },
        {static_cast<Eigen::Index>(grid.index_of(12.0)),
         static_cast<Eigen::Index>(grid.index_of(18.0))});
    CommutatorResidual r = equal_time_commutator_residual(sw);
    REQUIRE(r.residual > 1e-2);
  }
}

TEST_CASE("causality spot check: correlations concentrate on the light cone") {
  // homogeneous weak absorber, wide separation
  Grid1D grid(0.0, 40.0, 241);
  auto mesh = FrequencyMesh::uniform(6.0 / 1200.0, 6.0, 1200);
  const Eigen::Index n = 241;
  auto prof = MaterialProfile::homogeneous(grid, 1.0, 1.0, 1.0);
  auto preset = BathModel::drude_lorentz(Eigen::VectorXd::Constant(n, 0.6),
                                         Eigen::VectorXd::Constant(n, 0.15));
  MaterialProfile prof_eff = prof;
  SusceptibilityTable target = compute_chi(prof, preset, mesh);
  BathModel bath = bath_from_target_chi(prof_eff, target);
  auto chi = compute_chi(prof_eff, bath, mesh);
  std::vector<GreenSolution> sols(mesh.size());
  for (std::size_t j = 0; j < mesh.size(); ++j)
    sols[j] = green_fd(DielectricResponse::from_chi(chi, j));
  EFieldSweep sw = build_efield_sweep(prof_eff, chi,
                                      [&](std::size_t j) -> const GreenSolution& { return sols[j]; },
                                      {static_cast<Eigen::Index>(grid.index_of(12.0)),
                                       static_cast<Eigen::Index>(grid.index_of(28.0))});
  std::vector<double> taus;
  for (double t = 0.0; t <= 30.0; t += 0.5) taus.push_back(t);
  CorrelationResult c = vacuum_correlation_E(sw, 0, 1, taus);
  double spacelike = 0.0, cone = 0.0;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    if (taus[t] < 8.0) spacelike = std::max(spacelike, std::abs(c.direct[t]));
    if (taus[t] >= 14.0 && taus[t] <= 24.0) cone = std::max(cone, std::abs(c.direct[t]));
  }
  REQUIRE(spacelike < 0.25 * cone);
}
