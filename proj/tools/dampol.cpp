// dampol - damped-polariton mode toolkit
//
// Batch front end: parses an experiment config, runs the requested
// pipelines (chi, green, modes, verify, correlate, oracle) and emits CSV
// data files with JSON sidecars plus a machine-readable run report.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical singularity.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "dampol/config.hpp"
#include "dampol/pipeline.hpp"

namespace {

int run_with_pipelines(const std::string& config_path, const std::string& out_override,
                       const std::vector<std::string>& tol_overrides, unsigned threads,
                       const std::vector<std::string>& forced_pipelines) {
  std::vector<dampol::Diagnostic> diags;
  dampol::ExperimentConfig cfg = dampol::parse_config(config_path, diags);
  for (const auto& d : diags) std::cerr << d.str() << "\n";
  if (!diags.empty()) return 2;

  if (!forced_pipelines.empty()) cfg.pipelines = forced_pipelines;
  if (!out_override.empty()) {
    cfg.out_dir = out_override;
  } else if (cfg.out_dir.empty()) {
    const char* root = std::getenv("DAMPOL_OUT_ROOT");
    cfg.out_dir = root ? std::filesystem::path(root) / "out" : std::filesystem::path("out");
  } else if (const char* root = std::getenv("DAMPOL_OUT_ROOT"); root && cfg.out_dir.is_relative()) {
    cfg.out_dir = std::filesystem::path(root) / cfg.out_dir;
  }
  cfg.threads = threads;

  for (const std::string& ov : tol_overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --tol-override expects name=value, got '" << ov << "'\n";
      return 2;
    }
    try {
      cfg.tol_overrides[ov.substr(0, eq)] = std::stod(ov.substr(eq + 1));
    } catch (...) {
      std::cerr << "error: bad tolerance value in '" << ov << "'\n";
      return 2;
    }
  }

  std::vector<dampol::Diagnostic> vd = dampol::validate_config(cfg);
  bool fatal = false;
  for (const auto& d : vd) {
    std::cerr << d.str() << "\n";
    fatal |= d.severity == dampol::Diagnostic::Severity::error;
  }
  if (fatal) return 2;
  if (cfg.pipelines.empty()) {
    std::cerr << "error: no pipelines requested ([pipelines] run = ... or a subcommand)\n";
    return 2;
  }

  try {
    dampol::RunReport report = dampol::run_experiment(cfg);
    for (const auto& p : report.pipelines) {
      std::cout << p.name << ": " << p.status;
      if (!p.message.empty()) std::cout << " (" << p.message << ")";
      std::cout << " [" << p.wall_ms << " ms]\n";
    }
    std::cout << "report: " << (cfg.out_dir / "report.json").string() << "\n";
    return report.exit_code;
  } catch (const dampol::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const dampol::singularity_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dampol: Fano-diagonalized damped-polariton numerics (1D transverse sector)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> tol_overrides;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config and DAMPOL_OUT_ROOT)");
    cmd->add_option("--tol-override", tol_overrides, "tolerance override name=value")
        ->take_all();
    cmd->add_option("--threads", threads, "worker threads for frequency sweeps (0 = hardware)");
  };

  CLI::App* run = app.add_subcommand("run", "run the pipelines requested in the config");
  add_common(run);
  CLI::App* validate = app.add_subcommand("validate", "validate a config without computing");
  validate->add_option("--config", config_path, "experiment config file")->required();

  std::vector<std::string> shortcut_names = {"chi", "green", "modes", "verify", "correlate", "oracle"};
  std::vector<CLI::App*> shortcuts;
  for (const std::string& name : shortcut_names) {
    CLI::App* c = app.add_subcommand(name, "run only the " + name + " pipeline");
    add_common(c);
    shortcuts.push_back(c);
  }

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    std::vector<dampol::Diagnostic> diags;
    dampol::ExperimentConfig cfg = dampol::parse_config(config_path, diags);
    if (diags.empty()) {
      auto vd = dampol::validate_config(cfg);
      diags.insert(diags.end(), vd.begin(), vd.end());
    }
    bool fatal = false;
    for (const auto& d : diags) {
      std::cout << d.str() << "\n";
      fatal |= d.severity == dampol::Diagnostic::Severity::error;
    }
    if (!fatal) std::cout << "ok" << (diags.empty() ? "" : " (with warnings)") << "\n";
    return fatal ? 2 : 0;
  }

  std::vector<std::string> forced;
  for (std::size_t i = 0; i < shortcuts.size(); ++i)
    if (shortcuts[i]->parsed()) forced.push_back(shortcut_names[i]);

  return run_with_pipelines(config_path, out_dir, tol_overrides, threads, forced);
}
