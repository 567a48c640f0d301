#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "dampol/modes.hpp"

using namespace dampol;

namespace {

/// Three-region absorbing fixture with strongly lossy cladding, realized as
/// a tabulated bath so that every identity closes on the mesh.
struct Fixture {
  Grid1D grid{0.0, 40.0, 321};
  FrequencyMesh mesh = FrequencyMesh::uniform(8.0 / 1600.0, 8.0, 1600);
  MaterialProfile profile;
  BathModel bath;
  SusceptibilityTable chi;

  explicit Fixture(std::size_t n_points = 321) : grid(0.0, 40.0, n_points) {
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd rho = Eigen::VectorXd::Constant(n, 1.0);
    Eigen::VectorXd w0 = Eigen::VectorXd::Constant(n, 1.0);
    Eigen::VectorXd al(n), wp(n), gm(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = grid.x(static_cast<std::size_t>(i));
      const bool clad = x < 12.0 || x > 28.0;
      wp[i] = clad ? 2.0 : 1.0;
      gm[i] = clad ? 1.0 : 0.4;
      rho[i] = clad ? 1.0 : 1.1;
      w0[i] = clad ? 2.0 : 1.0;  // cladding resonant at the test frequency
      al[i] = std::sqrt(rho[i]) * wp[i];  // alpha^2 = eps0 rho wp^2
    }
    profile = MaterialProfile(grid, rho, w0, al);
    auto preset = BathModel::drude_lorentz(wp, gm);
    SusceptibilityTable target = compute_chi(profile, preset, mesh);
    bath = bath_from_target_chi(profile, target);
    chi = compute_chi(profile, bath, mesh);
  }

  Eigen::VectorXd v_row(std::size_t j) const {
    const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = bath.v_at(i, mesh, j);
    return v;
  }

  ModeCoefficientSet coefficients(std::size_t j, GreenSolution& g_out) const {
    DielectricResponse eps = DielectricResponse::from_chi(chi, j);
    g_out = green_fd(eps);
    STensorDiagonal s = build_s(profile, chi, j);
    Eigen::MatrixXcd fe = build_fE(g_out, chi, v_row(j), s, profile, j);
    return build_all_coefficients(fe, chi, bath, s, profile, j);
  }
};

}  // namespace

TEST_CASE("diagonal s tensor") {
  Grid1D grid(0.0, 1.0, 5);
  auto prof = MaterialProfile::homogeneous(grid, 1.0, 1.0, 1.0);
  SusceptibilityTable t;
  t.grid = grid;
  t.mesh = FrequencyMesh::uniform(2.0, 4.0, 8);  // first node at omega = 2
  t.chi = Eigen::MatrixXcd::Constant(5, 8, cplx(0.0, 1.0));

  SECTION("chi = i, rho = 1, omega = 2 gives s = 1") {
    STensorDiagonal s = build_s(prof, t, 0);
    REQUIRE(std::abs(s.at(0) - cplx(1.0, 0.0)) < 1e-15);
  }
  SECTION("|s|^2 / rho = hbar omega / 2 at every node") {
    auto prof2 = MaterialProfile::homogeneous(grid, 2.7, 1.0, 1.0);
    STensorDiagonal s = build_s(prof2, t, 0);
    for (Eigen::Index i = 0; i < 5; ++i)
      REQUIRE(std::norm(s.at(i)) / prof2.rho[i] == Catch::Approx(1.0).epsilon(1e-15));
  }
  SECTION("real chi still yields a unit-modulus phase") {
    t.chi.setConstant(cplx(-0.8, 0.0));
    STensorDiagonal s = build_s(prof, t, 0);
    for (Eigen::Index i = 0; i < 5; ++i)
      REQUIRE(std::abs(std::abs(s.at(i)) - 1.0) < 1e-15);  // sqrt(hw rho/2) = 1 here
  }
  SECTION("chi = 0 marks the point invalid") {
    t.chi.col(0).setZero();
    t.chi(1, 0) = cplx(0.0, 1.0);
    STensorDiagonal s = build_s(prof, t, 0);
    REQUIRE_THROWS_AS(s.at(0), validation_error);
    REQUIRE_NOTHROW(s.at(1));
  }
}

TEST_CASE("electric-field coefficient") {
  SECTION("columns vanish where absorption vanishes") {
    Grid1D grid(0.0, 10.0, 41);
    const Eigen::Index n = 41;
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(n, 1.0);
    for (Eigen::Index i = 0; i < 10; ++i) alpha[i] = 0.0;  // vacuum region
    MaterialProfile prof(grid, Eigen::VectorXd::Constant(n, 1.0),
                         Eigen::VectorXd::Constant(n, 1.0), alpha);
    auto mesh = FrequencyMesh::uniform(0.02, 4.0, 200);
    Eigen::MatrixXd v = Eigen::MatrixXd::Constant(n, 200, 0.4);
    for (Eigen::Index i = 0; i < 10; ++i) v.row(i).setZero();
    auto bath = BathModel::tabulated(v, mesh);
    auto chi = compute_chi(prof, bath, mesh);
    const std::size_t j = mesh.index_of(2.0, 0.51);
    DielectricResponse eps = DielectricResponse::from_chi(chi, j);
    GreenSolution g = green_fd(eps);
    STensorDiagonal s = build_s(prof, chi, j);
    Eigen::VectorXd vrow(n);
    for (Eigen::Index i = 0; i < n; ++i) vrow[i] = bath.v_at(i, mesh, j);
    Eigen::MatrixXcd fe = build_fE(g, chi, vrow, s, prof, j);
    REQUIRE(fe.leftCols(10).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(fe.rightCols(10).cwiseAbs().maxCoeff() > 0.0);
  }

  SECTION("route equivalence on a three-region absorbing stack") {
    Fixture fx;
    const std::size_t j = fx.mesh.index_of(2.0);
    GreenSolution g;
    ModeCoefficientSet set = fx.coefficients(j, g);
    NoiseAmplitude noise = build_noise(fx.profile, fx.chi, j);
    Eigen::MatrixXcd fe2 = build_fE_noise(g, noise);
    const double rel = (set.fE - fe2).cwiseAbs().maxCoeff() / set.fE.cwiseAbs().maxCoeff();
    REQUIRE(rel < 1e-10);
  }

  SECTION("homogeneous absorber: exponential falloff at rate Im k") {
    Grid1D grid(0.0, 30.0, 601);
    auto prof = MaterialProfile::homogeneous(grid, 1.0, 1.0, 1.0);
    auto mesh = FrequencyMesh::uniform(8.0 / 800.0, 8.0, 800);
    auto preset = BathModel::drude_lorentz(Eigen::VectorXd::Constant(601, 1.0),
                                           Eigen::VectorXd::Constant(601, 0.4));
    MaterialProfile prof_eff = prof;
    SusceptibilityTable target = compute_chi(prof, preset, mesh);
    BathModel bath = bath_from_target_chi(prof_eff, target);
    auto chi = compute_chi(prof_eff, bath, mesh);
    const std::size_t j = mesh.index_of(1.5);
    // analytic kernel: exact exponential decay
    LayerStack stack({{30.0, 1.0 + chi.at(300, j)}});
    GreenSolution g = green_multilayer(stack, mesh.omega[j], grid);
    STensorDiagonal s = build_s(prof_eff, chi, j);
    Eigen::VectorXd vrow(601);
    for (Eigen::Index i = 0; i < 601; ++i) vrow[i] = bath.v_at(i, mesh, j);
    Eigen::MatrixXcd fe = build_fE(g, chi, vrow, s, prof_eff, j);
    const cplx k = medium_wavenumber(1.0 + chi.at(300, j), mesh.omega[j]);
    const Eigen::Index src = 300;
    const double d1 = 3.0, d2 = 9.0;
    const Eigen::Index i1 = static_cast<Eigen::Index>(grid.index_of(15.0 + d1));
    const Eigen::Index i2 = static_cast<Eigen::Index>(grid.index_of(15.0 + d2));
    const double rate = -std::log(std::abs(fe(i2, src)) / std::abs(fe(i1, src))) / (d2 - d1);
    REQUIRE(rate == Catch::Approx(k.imag()).epsilon(1e-10));
  }
}

TEST_CASE("coefficient set identities") {
  Fixture fx;
  const std::size_t j = fx.mesh.index_of(2.0);
  GreenSolution g;
  ModeCoefficientSet set = fx.coefficients(j, g);
  const double w = set.omega;
  const double h = fx.grid.spacing();

  SECTION("f_Pi = -eps0 f_E exactly") {
    REQUIRE((set.fPi + set.fE).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("i w f_A = -f_Pi / eps0 to 1e-15") {
    Eigen::MatrixXcd r = cplx(0.0, w) * set.fA + set.fPi;
    REQUIRE(r.cwiseAbs().maxCoeff() < 1e-15 * set.fPi.cwiseAbs().maxCoeff() * w + 1e-18);
  }
  SECTION("momentum relation by substitution") {
    Eigen::MatrixXcd fx_m = set.fX.materialize(h);
    Eigen::MatrixXcd fp_m = set.fP.materialize(h);
    Eigen::MatrixXcd r = cplx(0.0, w) * fx_m;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
      r.row(i) += (fx.profile.alpha[i] / fx.profile.rho[i]) * set.fA.row(i) +
                  fp_m.row(i) / fx.profile.rho[i];
    REQUIRE(r.cwiseAbs().maxCoeff() / fp_m.cwiseAbs().maxCoeff() < 1e-8);
  }
  SECTION("bath kernel definition f_Q = -i rho w'^2 f_Y / w at sample nodes") {
    for (std::size_t k : {std::size_t(100), std::size_t(800), std::size_t(1500)}) {
      SpatialKernel fy = set.fY_regular(k);
      SpatialKernel fq = set.fQ_regular(k);
      const double wp = fx.mesh.omega[k];
      Eigen::MatrixXcd r = fq.materialize(h);
      Eigen::MatrixXcd y = fy.materialize(h);
      for (Eigen::Index i = 0; i < r.rows(); ++i)
        r.row(i) -= cplx(0.0, -1.0) * fx.profile.rho[i] * wp * wp / w * y.row(i);
      REQUIRE(r.cwiseAbs().maxCoeff() <= 1e-14 * fq.materialize(h).cwiseAbs().maxCoeff());
    }
  }
  SECTION("the pole node of the regular part is the delta weight's job") {
    REQUIRE_THROWS_AS(set.fY_regular(j), validation_error);
  }
}

TEST_CASE("eigenoperator residual report") {
  Fixture fx;
  const std::size_t j = fx.mesh.index_of(2.0);
  GreenSolution g;
  ModeCoefficientSet set = fx.coefficients(j, g);
  EigenResidualReport rep = eigen_residuals(set, fx.chi, {40, 400, 1200});

  SECTION("algebraic relations close at machine precision") {
    REQUIRE(rep.r_A < 1e-14);
    REQUIRE(rep.r_X < 1e-14);
    REQUIRE(rep.r_Y < 1e-13);
    REQUIRE(rep.r_Q < 1e-14);
    REQUIRE(rep.r_fA_def < 1e-15);
    REQUIRE(rep.r_fPi_def < 1e-15);
    REQUIRE(rep.r_fQ_def < 1e-14);
  }
  SECTION("differential relation closes exactly for the FD kernel") {
    REQUIRE(rep.r_Pi < 1e-11);
  }
  SECTION("bath-integral relation is quadrature-consistent") {
    REQUIRE(rep.r_P < 1e-6);
  }
}

TEST_CASE("differential relation measures second order with the analytic kernel") {
  // Homogeneous absorber solved analytically; the stencil residual of the
  // differential relation must shrink as h^2.
  std::vector<double> resid;
  for (std::size_t n : {161, 321, 641}) {
    Grid1D grid(0.0, 40.0, n);
    auto prof = MaterialProfile::homogeneous(grid, 1.0, 1.0, 1.0);
    auto mesh = FrequencyMesh::uniform(8.0 / 800.0, 8.0, 800);
    auto preset = BathModel::drude_lorentz(Eigen::VectorXd::Constant(n, 1.0),
                                           Eigen::VectorXd::Constant(n, 0.4));
    MaterialProfile prof_eff = prof;
    SusceptibilityTable target = compute_chi(prof, preset, mesh);
    BathModel bath = bath_from_target_chi(prof_eff, target);
    auto chi = compute_chi(prof_eff, bath, mesh);
    const std::size_t j = mesh.index_of(2.0);
    LayerStack stack({{40.0, 1.0 + chi.at(0, j)}});
    GreenSolution g = green_multilayer(stack, mesh.omega[j], grid);
    STensorDiagonal s = build_s(prof_eff, chi, j);
    Eigen::VectorXd vrow(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i)
      vrow[i] = bath.v_at(i, mesh, j);
    Eigen::MatrixXcd fe = build_fE(g, chi, vrow, s, prof_eff, j);
    ModeCoefficientSet set = build_all_coefficients(fe, chi, bath, s, prof_eff, j);
    resid.push_back(eigen_residuals(set, chi).r_Pi);
  }
  const double order1 = std::log2(resid[0] / resid[1]);
  const double order2 = std::log2(resid[1] / resid[2]);
  REQUIRE(order1 == Catch::Approx(2.0).margin(0.1));
  REQUIRE(order2 == Catch::Approx(2.0).margin(0.1));
}

TEST_CASE("commutation constraint") {
  Fixture fx;
  GreenSolution g1, g2;
  ModeCoefficientSet set1 = fx.coefficients(fx.mesh.index_of(2.0), g1);
  ModeCoefficientSet set2 = fx.coefficients(fx.mesh.index_of(2.4), g2);
  CommutationReport rep = commutation_residual(set1, set2, fx.chi, 0.35);

  SECTION("diagonal |s|^2 condition is exact") {
    REQUIRE(rep.s_condition < 1e-15);
  }
  SECTION("double-curl difference integral vanishes with the cladding") {
    REQUIRE(rep.curl_cross < 1e-6);
    REQUIRE(std::abs(rep.curl_cross - rep.curl_cross_flux) < 1e-8);
  }
  SECTION("off-diagonal constraint vanishes relative to the block scale") {
    REQUIRE(rep.offdiag < 1e-6);
    REQUIRE(rep.block_scale > 0.0);
  }
  SECTION("coincident frequencies are rejected") {
    REQUIRE_THROWS_AS(commutation_residual(set1, set1, fx.chi, 0.35), validation_error);
  }
}
