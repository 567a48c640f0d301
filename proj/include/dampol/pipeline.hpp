#pragma once

#include <chrono>
#include <complex>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dampol/config.hpp"
#include "dampol/errors.hpp"
#include "dampol/fields.hpp"
#include "dampol/greenfn.hpp"
#include "dampol/io.hpp"
#include "dampol/modes.hpp"
#include "dampol/oracle.hpp"
#include "dampol/parallel.hpp"

namespace dampol {

inline std::map<std::string, double> default_tolerances() {
  return {
      {"lossless_chi_rel", 1e-12},   {"kk_residual", 1e-3},
      {"coupling_roundtrip_rel", 1e-6}, {"green_homog_tm_abs", 1e-12},
      {"green_reciprocity_tm", 1e-10}, {"green_identity", 1e-6},
      {"green_identity_flux", 1e-8}, {"eigen_exact", 1e-13},
      {"eigen_quadrature", 1e-6},    {"s_condition", 1e-15},
      {"commutation_offdiag", 1e-6}, {"commutation_curl_cross", 1e-6},
      {"route_equivalence", 1e-10},  {"oracle_response_rel", 1e-2},
      {"oracle_vacuum_rel", 5e-2},   {"field_commutator", 1e-6},
      {"correlator_hermiticity", 1e-12}, {"correlate_routes", 1e-4},
  };
}

struct PipelineResult {
  std::string name;
  std::string status = "ok";  // ok | error
  std::string message;
  double wall_ms = 0.0;
  json residuals = json::object();
  std::vector<std::filesystem::path> artifacts;
  int error_code = 0;  // 2 validation, 3 singularity
};

struct RunReport {
  std::string config_hash;
  std::string started_utc;
  std::vector<PipelineResult> pipelines;
  int exit_code = 0;

  json to_json() const {
    json out{{"schema_version", 1},
             {"config_hash", config_hash},
             {"started_utc", started_utc},
             {"pipelines", json::array()}};
    for (const auto& p : pipelines) {
      json art = json::array();
      for (const auto& a : p.artifacts)
        art.push_back({{"path", a.string()},
                       {"fnv1a64", hex64(hash_file(a))},
                       {"bytes", std::filesystem::file_size(a)}});
      out["pipelines"].push_back({{"name", p.name},
                                  {"status", p.status},
                                  {"message", p.message},
                                  {"wall_ms", p.wall_ms},
                                  {"residuals", p.residuals},
                                  {"artifacts", art}});
    }
    out["exit_code"] = exit_code;
    return out;
  }
};

namespace pipedetail {

struct Context {
  ExperimentConfig cfg;
  ExperimentSetup setup;
  std::map<std::string, double> tol;
  std::filesystem::path out;

  // lazily shared products
  bool have_chi = false;
  SusceptibilityTable chi;
  bool have_consistent_bath = false;
  MaterialProfile bath_profile;  // omega0 renormalized for preset-derived baths
  BathModel tab_bath;

  SusceptibilityTable& ensure_chi() {
    if (!have_chi) {
      chi = compute_chi(setup.profile, setup.bath, setup.mesh, cfg.threads);
      have_chi = true;
    }
    return chi;
  }

  /// A tabulated bath together with a chi table computed from it; presets
  /// are converted through the absorption identity so that every identity
  /// of the construction closes on the mesh.
  void ensure_consistent_bath() {
    if (have_consistent_bath) return;
    if (setup.bath.kind == BathModel::Kind::none)
      throw validation_error("this pipeline needs an absorbing bath (type none given)");
    bath_profile = setup.profile;
    if (setup.bath.kind == BathModel::Kind::tabulated) {
      tab_bath = setup.bath;
    } else {
      SusceptibilityTable target = compute_chi(setup.profile, setup.bath, setup.mesh, cfg.threads);
      tab_bath = bath_from_target_chi(bath_profile, target);
    }
    chi = compute_chi(bath_profile, tab_bath, setup.mesh, cfg.threads);
    have_chi = true;
    have_consistent_bath = true;
  }

  Eigen::VectorXd v_row_at(std::size_t j) {
    const Eigen::Index n = static_cast<Eigen::Index>(setup.grid.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = tab_bath.v_at(i, setup.mesh, j);
    return v;
  }
};

inline PipelineResult run_chi(Context& ctx) {
  PipelineResult res;
  res.name = "chi";
  SusceptibilityTable& chi = ctx.ensure_chi();
  const auto csv = ctx.out / "chi.csv";
  export_chi_csv(csv, chi);
  json side = chi_sidecar(chi, ctx.cfg.omega_ref);
  if (ctx.cfg.chi_kramers_kronig) {
    double worst = 0.0;
    bool any = false;
    for (Eigen::Index i = 0; i < chi.chi.rows(); ++i) {
      if (ctx.setup.profile.is_vacuum(i)) continue;
      KramersKronigResult kk = kramers_kronig_residual(chi, i);
      if (kk.not_applicable) continue;
      any = true;
      worst = std::max(worst, kk.residual);
      side["kramers_kronig_tail_bound"] = kk.tail_bound;
    }
    if (any) {
      side["kramers_kronig_residual"] = worst;
      res.residuals["kramers_kronig"] = worst;
    } else {
      side["kramers_kronig_residual"] = "not_applicable";
    }
  }
  const auto sidecar = ctx.out / "chi.json";
  write_json(sidecar, side);
  res.artifacts = {csv, sidecar};
  return res;
}

inline PipelineResult run_green(Context& ctx) {
  PipelineResult res;
  res.name = "green";
  SusceptibilityTable& chi = ctx.ensure_chi();
  if (ctx.cfg.green_omegas.empty())
    throw validation_error("green: no omega requested ([green] omega = ...)");
  std::size_t idx = 0;
  for (double w : ctx.cfg.green_omegas) {
    const std::size_t j = ctx.setup.mesh.index_of(w, 0.51);
    DielectricResponse eps = DielectricResponse::from_chi(chi, j);
    GreenSolution sol = green_fd(eps);
    const std::string tag = "green_" + std::to_string(idx);
    const auto csv = ctx.out / (tag + ".csv");
    export_kernel_csv(csv, ctx.setup.grid, sol.g, "x,xp,re_g,im_g");
    json side{{"omega", sol.omega},
              {"solver", "finite_difference"},
              {"boundary", sol.boundary},
              {"grid_hash", hex64(grid_hash(ctx.setup.grid))},
              {"points_per_wavelength", sol.points_per_wavelength},
              {"reciprocity_residual", sol.reciprocity_residual()},
              {"wave_equation_residual", wave_equation_residual(sol, eps)}};
    if (sol.underresolved_warning) side["warning"] = "under-resolved grid (< 20 points per wavelength)";
    const auto sidecar = ctx.out / (tag + ".json");
    write_json(sidecar, side);
    res.artifacts.push_back(csv);
    res.artifacts.push_back(sidecar);
    if (ctx.cfg.green_binary_dump) {
      const auto bin = ctx.out / (tag + ".bin");
      export_matrix_binary(bin, sol.g);
      res.artifacts.push_back(bin);
    }
    res.residuals["reciprocity_" + std::to_string(idx)] = sol.reciprocity_residual();
    ++idx;
  }
  return res;
}

inline PipelineResult run_modes(Context& ctx) {
  PipelineResult res;
  res.name = "modes";
  ctx.ensure_consistent_bath();
  if (ctx.cfg.modes_omegas.empty())
    throw validation_error("modes: no omega requested ([modes] omega = ...)");
  std::size_t idx = 0;
  for (double w : ctx.cfg.modes_omegas) {
    const std::size_t j = ctx.setup.mesh.index_of(w, 0.51);
    DielectricResponse eps = DielectricResponse::from_chi(ctx.chi, j);
    GreenSolution sol = green_fd(eps);
    STensorDiagonal s = build_s(ctx.bath_profile, ctx.chi, j);
    Eigen::VectorXd vrow = ctx.v_row_at(j);
    Eigen::MatrixXcd fe = build_fE(sol, ctx.chi, vrow, s, ctx.bath_profile, j);
    ModeCoefficientSet set = build_all_coefficients(fe, ctx.chi, ctx.tab_bath, s, ctx.bath_profile, j);
    const std::string tag = "modes_" + std::to_string(idx);
    const double h = ctx.setup.grid.spacing();
    struct Item {
      const char* name;
      Eigen::MatrixXcd mat;
    };
    std::vector<Item> items = {{"fE", set.fE},
                               {"fA", set.fA},
                               {"fPi", set.fPi},
                               {"fX", set.fX.materialize(h)},
                               {"fP", set.fP.materialize(h)},
                               {"fY_delta", set.fY_delta.materialize(h)},
                               {"fQ_delta", set.fQ_delta.materialize(h)}};
    for (const auto& item : items) {
      const auto csv = ctx.out / (tag + "_" + item.name + ".csv");
      export_kernel_csv(csv, ctx.setup.grid, item.mat, "x,xp,re,im");
      res.artifacts.push_back(csv);
    }
    json side{{"omega", set.omega},
              {"grid_hash", hex64(grid_hash(ctx.setup.grid))},
              {"kernels", {"fE", "fA", "fPi", "fX", "fP", "fY_delta", "fQ_delta"}},
              {"delta_convention", "grid delta folded in as 1/h at coincident nodes"}};
    const auto sidecar = ctx.out / (tag + ".json");
    write_json(sidecar, side);
    res.artifacts.push_back(sidecar);
    ++idx;
  }
  return res;
}

inline PipelineResult run_verify(Context& ctx) {
  PipelineResult res;
  res.name = "verify";
  ctx.ensure_consistent_bath();
  const FrequencyMesh& mesh = ctx.setup.mesh;
  if (!(ctx.cfg.verify_omega > 0.0) || !(ctx.cfg.verify_omega2 > 0.0))
    throw validation_error("verify: set [verify] omega and omega2 (distinct mesh nodes)");
  const std::size_t j1 = mesh.index_of(ctx.cfg.verify_omega, 0.51);
  const std::size_t j2 = mesh.index_of(ctx.cfg.verify_omega2, 0.51);
  if (j1 == j2) throw validation_error("verify: omega and omega2 must be distinct mesh nodes");

  auto make_set = [&](std::size_t j, GreenSolution& sol_out) {
    DielectricResponse eps = DielectricResponse::from_chi(ctx.chi, j);
    sol_out = green_fd(eps);
    STensorDiagonal s = build_s(ctx.bath_profile, ctx.chi, j);
    Eigen::VectorXd vrow = ctx.v_row_at(j);
    Eigen::MatrixXcd fe = build_fE(sol_out, ctx.chi, vrow, s, ctx.bath_profile, j);
    return build_all_coefficients(fe, ctx.chi, ctx.tab_bath, s, ctx.bath_profile, j);
  };
  GreenSolution g1, g2;
  ModeCoefficientSet set1 = make_set(j1, g1);
  ModeCoefficientSet set2 = make_set(j2, g2);

  json entries = json::array();
  auto entry = [&](const std::string& name, double value, double tolv) {
    entries.push_back(
        {{"identity", name}, {"residual", value}, {"tolerance", tolv}, {"pass", value <= tolv}});
    res.residuals[name] = value;
  };

  std::vector<std::size_t> samples;
  for (std::size_t k = 2; k < mesh.size(); k += mesh.size() / 7 + 1) samples.push_back(k);
  EigenResidualReport er = eigen_residuals(set1, ctx.chi, samples);
  entry("eigenrel_A", er.r_A, ctx.tol["eigen_exact"]);
  entry("eigenrel_Pi_stencil", er.r_Pi, 1.0);  // O(h^2), reported not gated
  entry("eigenrel_X", er.r_X, ctx.tol["eigen_exact"]);
  entry("eigenrel_P_quadrature", er.r_P, ctx.tol["eigen_quadrature"]);
  entry("eigenrel_Y", er.r_Y, ctx.tol["eigen_exact"]);
  entry("eigenrel_Q", er.r_Q, ctx.tol["eigen_exact"]);
  entry("def_fA", er.r_fA_def, ctx.tol["eigen_exact"]);
  entry("def_fPi", er.r_fPi_def, ctx.tol["eigen_exact"]);
  entry("def_fQ", er.r_fQ_def, ctx.tol["eigen_exact"]);

  CommutationReport cr = commutation_residual(set1, set2, ctx.chi);
  entry("s_condition", cr.s_condition, ctx.tol["s_condition"]);
  entry("curl_cross", cr.curl_cross, ctx.tol["commutation_curl_cross"]);
  entry("commutator_offdiag", cr.offdiag, ctx.tol["commutation_offdiag"]);

  NoiseAmplitude noise = build_noise(ctx.bath_profile, ctx.chi, j1);
  Eigen::MatrixXcd fe_noise = build_fE_noise(g1, noise);
  const double route = (set1.fE - fe_noise).cwiseAbs().maxCoeff() /
                       set1.fE.cwiseAbs().maxCoeff();
  entry("route_equivalence", route, ctx.tol["route_equivalence"]);

  DielectricResponse eps1 = DielectricResponse::from_chi(ctx.chi, j1);
  GreenIdentityReport gi = green_identity_residual(g1, eps1);
  entry("green_identity", gi.residual, ctx.tol["green_identity"]);
  entry("green_identity_flux", gi.flux_max, ctx.tol["green_identity_flux"]);

  const auto path = ctx.out / "verify_report.json";
  write_json(path, json{{"omega", set1.omega},
                        {"omega2", set2.omega},
                        {"identities", entries},
                        {"curl_cross_flux", cr.curl_cross_flux},
                        {"commutator_block_scale", cr.block_scale}});
  res.artifacts.push_back(path);
  return res;
}

inline PipelineResult run_correlate(Context& ctx) {
  PipelineResult res;
  res.name = "correlate";
  ctx.ensure_consistent_bath();
  if (!(ctx.cfg.correlate_n_tau > 0))
    throw validation_error("correlate: set [correlate] x, x2, tau_max, n_tau");
  const Eigen::Index ia = static_cast<Eigen::Index>(ctx.setup.grid.index_of(ctx.cfg.correlate_x));
  const Eigen::Index ib = static_cast<Eigen::Index>(ctx.setup.grid.index_of(ctx.cfg.correlate_x2));

  // independent per-frequency solves, written into disjoint slots
  std::vector<GreenSolution> sols(ctx.setup.mesh.size());
  parallel_for(ctx.setup.mesh.size(), ctx.cfg.threads, [&](std::size_t j) {
    sols[j] = green_fd(DielectricResponse::from_chi(ctx.chi, j));
  });
  EFieldSweep sweep = build_efield_sweep(ctx.bath_profile, ctx.chi,
                                         [&](std::size_t j) -> const GreenSolution& { return sols[j]; },
                                         {ia, ib});
  std::vector<double> taus(ctx.cfg.correlate_n_tau);
  for (std::size_t t = 0; t < taus.size(); ++t)
    taus[t] = ctx.cfg.correlate_tau_max * static_cast<double>(t) /
              static_cast<double>(std::max<std::size_t>(1, taus.size() - 1));
  CorrelationResult corr = vacuum_correlation_E(sweep, 0, 1, taus);
  CommutatorResidual comm = equal_time_commutator_residual(sweep);

  const auto csv = ctx.out / "correlate.csv";
  {
    CsvWriter w(csv);
    w.header("x,xp,tau,re,im,re_route2,im_route2");
    for (std::size_t t = 0; t < taus.size(); ++t)
      w.row({ctx.cfg.correlate_x, ctx.cfg.correlate_x2, taus[t], corr.direct[t].real(),
             corr.direct[t].imag(), corr.via_im_g[t].real(), corr.via_im_g[t].imag()});
  }
  json side{{"mesh", {{"omega_min", ctx.setup.mesh.front()},
                      {"omega_max", ctx.setup.mesh.back()},
                      {"n_points", ctx.setup.mesh.size()}}},
            {"route_agreement", corr.route_agreement},
            {"truncation_ratio", corr.truncation_ratio},
            {"truncation_warning", corr.truncation_warning},
            {"equal_time_commutator", comm.residual}};
  const auto sidecar = ctx.out / "correlate.json";
  write_json(sidecar, side);
  res.artifacts = {csv, sidecar};
  res.residuals["route_agreement"] = corr.route_agreement;
  res.residuals["equal_time_commutator"] = comm.residual;
  return res;
}

inline PipelineResult run_oracle(Context& ctx) {
  PipelineResult res;
  res.name = "oracle";
  ctx.ensure_consistent_bath();
  const ExperimentConfig& cfg = ctx.cfg;
  if (cfg.oracle_n_sites < 3 || cfg.oracle_n_bath < 2)
    throw validation_error("oracle: set [oracle] n_sites, n_bath, bath_omega_max, drive_x, drive_omega");

  const MaterialProfile& src = ctx.bath_profile;
  bool homogeneous = true;
  for (std::size_t i = 1; i < src.size() && homogeneous; ++i)
    homogeneous = src.rho[static_cast<Eigen::Index>(i)] == src.rho[0] &&
                  src.omega0[static_cast<Eigen::Index>(i)] == src.omega0[0] &&
                  src.alpha[static_cast<Eigen::Index>(i)] == src.alpha[0];
  if (!homogeneous)
    throw validation_error("oracle: the driven-response comparison requires a homogeneous profile");

  Grid1D ogrid(ctx.setup.grid.x_min, ctx.setup.grid.x_max, cfg.oracle_n_sites);
  MaterialProfile oprofile = MaterialProfile::homogeneous(ogrid, src.rho[0], src.omega0[0], src.alpha[0]);
  oracle::BathDiscretization bd =
      oracle::BathDiscretization::from_bath(oprofile, ctx.tab_bath, cfg.oracle_bath_omega_max,
                                            cfg.oracle_n_bath);
  oracle::DiscreteQuadraticModel model =
      oracle::assemble_hamiltonian(oprofile, bd, oracle::BoundaryCondition::periodic);
  oracle::StabilityReport stab = oracle::validate_stability(model);
  if (!stab.positive_definite)
    throw validation_error("oracle: Hamiltonian not positive definite; most negative direction " +
                           stab.worst_slot);

  // Lorentzian-smoothed drive: complex frequency w + i delta with delta a
  // multiple of the bath spacing; the continuum side is evaluated at the
  // same complex frequency.
  const double dbath = bd.omega[1] - bd.omega[0];
  const cplx wc(cfg.oracle_drive_omega, cfg.oracle_smoothing_factor * dbath);
  const std::size_t i_drive = ogrid.index_of(cfg.oracle_drive_x);
  Eigen::VectorXcd j_drive = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(ogrid.size()));
  j_drive[static_cast<Eigen::Index>(i_drive)] = 1.0;
  Eigen::VectorXcd e_disc = oracle::classical_response(model, j_drive, wc);

  // continuum: E(x) = -i mu0 w sum_images G j with chi at the complex frequency
  const cplx chi_c = chi_complex_freq(oprofile, ctx.tab_bath, ctx.setup.mesh, 0, wc);
  const cplx k = std::sqrt(wc * wc * (1.0 + chi_c));
  const cplx kk = k.imag() < 0.0 ? -k : k;
  const double length = ogrid.x_max - ogrid.x_min;
  auto g_periodic = [&](double x, double xp) {
    cplx acc(0.0, 0.0);
    for (int img = -40; img <= 40; ++img) {
      const double d = std::abs(x - xp + img * length);
      acc += std::exp(cplx(0.0, 1.0) * kk * d) / (cplx(0.0, 2.0) * kk);
    }
    return acc;
  };
  const double h = ogrid.spacing();
  double rel = 0.0;
  json samples = json::array();
  for (std::size_t probe : {ogrid.size() / 4, ogrid.size() / 2, (3 * ogrid.size()) / 4}) {
    // drive density 1 over one cell: int G j dx' = h G(x, x_drive)
    const cplx e_cont = cplx(0.0, -1.0) * wc * h * g_periodic(ogrid.x(probe), ogrid.x(i_drive));
    const cplx e_d = e_disc[static_cast<Eigen::Index>(probe)];
    const double r = std::abs(e_d - e_cont) / std::abs(e_cont);
    rel = std::max(rel, r);
    samples.push_back({{"x", ogrid.x(probe)},
                       {"re_discrete", e_d.real()},
                       {"im_discrete", e_d.imag()},
                       {"re_continuum", e_cont.real()},
                       {"im_continuum", e_cont.imag()},
                       {"rel_err", r}});
  }
  res.residuals["response_rel_err"] = rel;

  json report{{"n_sites", cfg.oracle_n_sites},
              {"n_bath", cfg.oracle_n_bath},
              {"positive_definite", stab.positive_definite},
              {"drive_omega", cfg.oracle_drive_omega},
              {"smoothing_width", cfg.oracle_smoothing_factor * dbath},
              {"response_samples", samples},
              {"response_rel_err", rel},
              {"response_tolerance", ctx.tol["oracle_response_rel"]},
              {"response_pass", rel <= ctx.tol["oracle_response_rel"]}};

  // normal-mode export for small models
  if (model.dim() <= 2600) {
    oracle::BogoliubovModes nm = oracle::normal_modes(model);
    report["symplectic_residual"] = nm.symplectic_residual;
    const auto csv = ctx.out / "oracle_eigenvalues.csv";
    CsvWriter w(csv);
    w.header("mode,omega");
    for (Eigen::Index k2 = 0; k2 < nm.omega.size(); ++k2)
      w.row({static_cast<double>(k2), nm.omega[k2]});
    res.artifacts.push_back(csv);
    res.residuals["symplectic_residual"] = nm.symplectic_residual;
  }

  const auto path = ctx.out / "oracle_report.json";
  write_json(path, report);
  res.artifacts.push_back(path);
  return res;
}

}  // namespace pipedetail

/// Executes the requested pipelines in dependency order. Returns a report
/// with per-pipeline status, residuals and an artifact manifest; CSV output
/// bytes depend only on the config (timestamps live in the report header).
inline RunReport run_experiment(const ExperimentConfig& cfg) {
  RunReport report;
  report.config_hash = hex64(fnv1a64(cfg.raw_text));
  {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    report.started_utc = buf;
  }

  pipedetail::Context ctx;
  ctx.cfg = cfg;
  ctx.setup = build_setup(cfg);
  ctx.tol = default_tolerances();
  for (const auto& [k, v] : cfg.tol_overrides) ctx.tol[k] = v;
  ctx.out = cfg.out_dir;
  std::filesystem::create_directories(ctx.out);

  const std::vector<std::string> order = {"chi", "green", "modes", "verify", "correlate", "oracle"};
  for (const std::string& name : order) {
    if (std::find(cfg.pipelines.begin(), cfg.pipelines.end(), name) == cfg.pipelines.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    PipelineResult res;
    try {
      if (name == "chi") res = pipedetail::run_chi(ctx);
      else if (name == "green") res = pipedetail::run_green(ctx);
      else if (name == "modes") res = pipedetail::run_modes(ctx);
      else if (name == "verify") res = pipedetail::run_verify(ctx);
      else if (name == "correlate") res = pipedetail::run_correlate(ctx);
      else res = pipedetail::run_oracle(ctx);
    } catch (const validation_error& e) {
      res.name = name;
      res.status = "error";
      res.message = e.what();
      res.error_code = 2;
    } catch (const singularity_error& e) {
      res.name = name;
      res.status = "error";
      res.message = e.what();
      res.error_code = 3;
    } catch (const lossless_point_error& e) {
      res.name = name;
      res.status = "error";
      res.message = e.what();
      res.error_code = 3;
    }
    res.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0).count();
    if (res.error_code != 0 && report.exit_code == 0) report.exit_code = res.error_code;
    report.pipelines.push_back(std::move(res));
  }

  write_json(ctx.out / "report.json", report.to_json());
  return report;
}

}  // namespace dampol
