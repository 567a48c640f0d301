#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dampol/errors.hpp"
#include "dampol/grid.hpp"
#include "dampol/material.hpp"
#include "dampol/mesh.hpp"

namespace dampol {

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string section;
  std::string key;
  std::string message;
  int line = 0;

  std::string str() const {
    std::string s = severity == Severity::error ? "error" : "warning";
    s += " [" + section + (key.empty() ? "" : "." + key) + "]";
    if (line > 0) s += " line " + std::to_string(line);
    return s + ": " + message;
  }
};

/// One material layer, specified by thickness or by explicit extent.
struct LayerSpec {
  double thickness = -1.0;
  double x0 = 0.0, x1 = 0.0;
  bool explicit_extent = false;
  double rho = 1.0;
  double omega0 = 1.0;
  double alpha = 1.0;
  int line = 0;
};

/// Parsed experiment configuration: a flat, sectioned key-value format with
/// explicit units in the comments; no expression evaluation.
struct ExperimentConfig {
  std::filesystem::path source_path;
  std::string raw_text;

  double omega_ref = 1.0;

  double x_min = 0.0, x_max = 1.0;
  std::size_t grid_n = 0;

  double mesh_omega_min = 0.0, mesh_omega_max = 0.0;
  std::size_t mesh_n = 0;

  std::vector<LayerSpec> layers;
  std::filesystem::path material_table;  // alternative to layers

  enum class BathKind { none, drude_lorentz, tabulated };
  BathKind bath_kind = BathKind::none;
  double bath_omega_p = 0.0;
  double bath_gamma = 0.0;
  std::filesystem::path bath_file;

  std::vector<std::string> pipelines;

  bool chi_kramers_kronig = false;
  std::vector<double> green_omegas;
  std::string green_solver = "fd";
  bool green_binary_dump = false;
  std::vector<double> modes_omegas;
  double verify_omega = 0.0, verify_omega2 = 0.0;
  double correlate_x = 0.0, correlate_x2 = 0.0, correlate_tau_max = 0.0;
  std::size_t correlate_n_tau = 0;
  std::size_t oracle_n_sites = 0, oracle_n_bath = 0;
  double oracle_bath_omega_max = 0.0;
  double oracle_drive_x = 0.0, oracle_drive_omega = 0.0;
  double oracle_smoothing_factor = 3.0;

  std::filesystem::path out_dir;
  std::map<std::string, double> tol_overrides;

  unsigned threads = 0;  // 0 = hardware default
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace cfgdetail

/// Parses the config file. Syntax errors are reported as diagnostics with
/// line numbers; on any syntax error the returned config is unusable.
inline ExperimentConfig parse_config(const std::filesystem::path& path,
                                     std::vector<Diagnostic>& diags) {
  ExperimentConfig cfg;
  cfg.source_path = path;
  std::ifstream in(path);
  if (!in) {
    diags.push_back({Diagnostic::Severity::error, "file", "", "cannot open " + path.string(), 0});
    return cfg;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  cfg.raw_text = buf.str();

  std::string section;
  std::istringstream lines(cfg.raw_text);
  std::string line;
  int ln = 0;
  auto err = [&](const std::string& key, const std::string& msg) {
    diags.push_back({Diagnostic::Severity::error, section, key, msg, ln});
  };

  while (std::getline(lines, line)) {
    ++ln;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = cfgdetail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        err("", "malformed section header");
        continue;
      }
      section = cfgdetail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      err("", "expected key = value");
      continue;
    }
    const std::string key = cfgdetail::trim(line.substr(0, eq));
    const std::string val = cfgdetail::trim(line.substr(eq + 1));
    auto num = [&](double& slot) {
      double v;
      if (!cfgdetail::parse_double(val, v))
        err(key, "not a number: '" + val + "'");
      else
        slot = v;
    };
    auto count = [&](std::size_t& slot) {
      double v;
      if (!cfgdetail::parse_double(val, v) || v < 0 || v != std::floor(v))
        err(key, "not a nonnegative integer: '" + val + "'");
      else
        slot = static_cast<std::size_t>(v);
    };
    auto num_list = [&](std::vector<double>& slot) {
      for (const std::string& tok : cfgdetail::split_ws(val)) {
        double v;
        if (!cfgdetail::parse_double(tok, v)) {
          err(key, "not a number: '" + tok + "'");
          return;
        }
        slot.push_back(v);
      }
    };

    if (section == "units") {
      if (key == "omega_ref") num(cfg.omega_ref);
      else err(key, "unknown key");
    } else if (section == "grid") {
      if (key == "x_min") num(cfg.x_min);
      else if (key == "x_max") num(cfg.x_max);
      else if (key == "n_points") count(cfg.grid_n);
      else err(key, "unknown key");
    } else if (section == "mesh") {
      if (key == "omega_min") num(cfg.mesh_omega_min);
      else if (key == "omega_max") num(cfg.mesh_omega_max);
      else if (key == "n_points") count(cfg.mesh_n);
      else err(key, "unknown key");
    } else if (section == "material") {
      if (key == "layer") {
        LayerSpec ls;
        ls.line = ln;
        bool ok = true;
        for (const std::string& tok : cfgdetail::split_ws(val)) {
          const std::size_t e2 = tok.find('=');
          if (e2 == std::string::npos) {
            err(key, "layer fields must be name=value: '" + tok + "'");
            ok = false;
            break;
          }
          const std::string k2 = tok.substr(0, e2);
          double v2;
          if (!cfgdetail::parse_double(tok.substr(e2 + 1), v2)) {
            err(key, "not a number in layer field '" + tok + "'");
            ok = false;
            break;
          }
          if (k2 == "thickness") ls.thickness = v2;
          else if (k2 == "x0") { ls.x0 = v2; ls.explicit_extent = true; }
          else if (k2 == "x1") { ls.x1 = v2; ls.explicit_extent = true; }
          else if (k2 == "rho") ls.rho = v2;
          else if (k2 == "omega0") ls.omega0 = v2;
          else if (k2 == "alpha") ls.alpha = v2;
          else {
            err(key, "unknown layer field '" + k2 + "'");
            ok = false;
            break;
          }
        }
        if (ok) cfg.layers.push_back(ls);
      } else if (key == "tabulated") {
        cfg.material_table = val;
      } else err(key, "unknown key");
    } else if (section == "bath") {
      if (key == "type") {
        if (val == "none") cfg.bath_kind = ExperimentConfig::BathKind::none;
        else if (val == "drude_lorentz") cfg.bath_kind = ExperimentConfig::BathKind::drude_lorentz;
        else if (val == "tabulated") cfg.bath_kind = ExperimentConfig::BathKind::tabulated;
        else err(key, "unknown bath type '" + val + "'");
      } else if (key == "omega_p") num(cfg.bath_omega_p);
      else if (key == "gamma") num(cfg.bath_gamma);
      else if (key == "file") cfg.bath_file = val;
      else err(key, "unknown key");
    } else if (section == "pipelines") {
      if (key == "run") {
        std::string v = val;
        std::replace(v.begin(), v.end(), ',', ' ');
        cfg.pipelines = cfgdetail::split_ws(v);
      } else err(key, "unknown key");
    } else if (section == "chi") {
      if (key == "kramers_kronig") cfg.chi_kramers_kronig = (val == "true" || val == "1");
      else err(key, "unknown key");
    } else if (section == "green") {
      if (key == "omega") num_list(cfg.green_omegas);
      else if (key == "solver") cfg.green_solver = val;
      else if (key == "binary_dump") cfg.green_binary_dump = (val == "true" || val == "1");
      else err(key, "unknown key");
    } else if (section == "modes") {
      if (key == "omega") num_list(cfg.modes_omegas);
      else err(key, "unknown key");
    } else if (section == "verify") {
      if (key == "omega") num(cfg.verify_omega);
      else if (key == "omega2") num(cfg.verify_omega2);
      else err(key, "unknown key");
    } else if (section == "correlate") {
      if (key == "x") num(cfg.correlate_x);
      else if (key == "x2") num(cfg.correlate_x2);
      else if (key == "tau_max") num(cfg.correlate_tau_max);
      else if (key == "n_tau") count(cfg.correlate_n_tau);
      else err(key, "unknown key");
    } else if (section == "oracle") {
      if (key == "n_sites") count(cfg.oracle_n_sites);
      else if (key == "n_bath") count(cfg.oracle_n_bath);
      else if (key == "bath_omega_max") num(cfg.oracle_bath_omega_max);
      else if (key == "drive_x") num(cfg.oracle_drive_x);
      else if (key == "drive_omega") num(cfg.oracle_drive_omega);
      else if (key == "smoothing_factor") num(cfg.oracle_smoothing_factor);
      else err(key, "unknown key");
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = val;
      else err(key, "unknown key");
    } else if (section == "tolerances") {
      double v;
      if (!cfgdetail::parse_double(val, v)) err(key, "not a number: '" + val + "'");
      else cfg.tol_overrides[key] = v;
    } else {
      err(key, "unknown section '" + section + "'");
    }
  }
  return cfg;
}

/// Static validation without computation.
inline std::vector<Diagnostic> validate_config(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> diags;
  auto error = [&](const std::string& sec, const std::string& key, const std::string& msg,
                   int line = 0) {
    diags.push_back({Diagnostic::Severity::error, sec, key, msg, line});
  };
  auto warn = [&](const std::string& sec, const std::string& key, const std::string& msg) {
    diags.push_back({Diagnostic::Severity::warning, sec, key, msg, 0});
  };

  if (!(cfg.omega_ref > 0.0)) error("units", "omega_ref", "must be positive");
  if (cfg.grid_n < 3) error("grid", "n_points", "need at least 3 grid points");
  if (!(cfg.x_max > cfg.x_min)) error("grid", "x_max", "must exceed x_min");
  if (cfg.mesh_n < 4) error("mesh", "n_points", "need at least 4 mesh points");
  if (!(cfg.mesh_omega_min > 0.0)) error("mesh", "omega_min", "must be positive");
  if (!(cfg.mesh_omega_max > cfg.mesh_omega_min)) error("mesh", "omega_max", "must exceed omega_min");

  if (cfg.layers.empty() && cfg.material_table.empty())
    error("material", "", "no layers and no tabulated profile given");
  if (!cfg.layers.empty() && !cfg.material_table.empty())
    error("material", "", "give either layers or a tabulated profile, not both");
  if (!cfg.material_table.empty() && !std::filesystem::exists(cfg.material_table))
    error("material", "tabulated", "file not found: " + cfg.material_table.string());

  // Layer geometry: explicit extents must tile the grid without overlap;
  // thickness-style layers must sum to the grid span.
  if (!cfg.layers.empty()) {
    bool any_explicit = false, any_thickness = false;
    for (const auto& l : cfg.layers) {
      (l.explicit_extent ? any_explicit : any_thickness) = true;
      if (l.rho <= 0.0)
        error("material", "layer", "rho must be positive", l.line);
      if (l.omega0 < 0.0) error("material", "layer", "omega0 must be >= 0", l.line);
      if (l.alpha < 0.0) error("material", "layer", "alpha must be >= 0", l.line);
      if (!l.explicit_extent && !(l.thickness > 0.0))
        error("material", "layer", "thickness must be positive", l.line);
      if (l.explicit_extent && !(l.x1 > l.x0))
        error("material", "layer", "x1 must exceed x0", l.line);
    }
    if (any_explicit && any_thickness)
      error("material", "layer", "mix of thickness and explicit-extent layers");
    if (any_explicit) {
      auto sorted = cfg.layers;
      std::sort(sorted.begin(), sorted.end(),
                [](const LayerSpec& a, const LayerSpec& b) { return a.x0 < b.x0; });
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i].x1 > sorted[i + 1].x0 + 1e-12)
          error("material", "layer", "overlapping layer extents", sorted[i + 1].line);
      if (!sorted.empty() &&
          (std::abs(sorted.front().x0 - cfg.x_min) > 1e-9 ||
           std::abs(sorted.back().x1 - cfg.x_max) > 1e-9))
        error("material", "layer", "layer extents do not cover the grid span");
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i + 1].x0 - sorted[i].x1 > 1e-9)
          error("material", "layer", "gap between layers", sorted[i + 1].line);
    } else if (any_thickness) {
      double total = 0.0;
      for (const auto& l : cfg.layers) total += l.thickness;
      if (std::abs(total - (cfg.x_max - cfg.x_min)) > 1e-9 * std::max(1.0, total))
        error("material", "layer",
              "layer thicknesses sum to " + std::to_string(total) + " but the grid spans " +
                  std::to_string(cfg.x_max - cfg.x_min));
    }
  }

  if (cfg.bath_kind == ExperimentConfig::BathKind::drude_lorentz) {
    if (!(cfg.bath_omega_p > 0.0)) error("bath", "omega_p", "must be positive");
    if (!(cfg.bath_gamma > 0.0)) error("bath", "gamma", "must be positive");
  }
  if (cfg.bath_kind == ExperimentConfig::BathKind::tabulated) {
    if (!std::filesystem::exists(cfg.bath_file))
      error("bath", "file", "file not found: " + cfg.bath_file.string());
  }

  for (const auto& [name, v] : cfg.tol_overrides)
    if (!(v > 0.0)) error("tolerances", name, "tolerance must be positive");

  const std::vector<std::string> known = {"chi", "green", "modes", "verify", "correlate", "oracle"};
  for (const std::string& p : cfg.pipelines)
    if (std::find(known.begin(), known.end(), p) == known.end())
      error("pipelines", "run", "unknown pipeline '" + p + "'");

  // Bath table coarser than the requested mesh -> interpolation warning.
  if (cfg.bath_kind == ExperimentConfig::BathKind::tabulated &&
      std::filesystem::exists(cfg.bath_file) && cfg.mesh_n >= 4) {
    std::ifstream in(cfg.bath_file);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line))
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) ++rows;
    if (rows > 1 && rows - 1 < cfg.mesh_n)
      warn("bath", "file", "bath tabulated on " + std::to_string(rows - 1) +
                               " frequencies, coarser than the " + std::to_string(cfg.mesh_n) +
                               "-point mesh; linear interpolation will be used");
  }
  return diags;
}

/// Materializes the config into library objects.
struct ExperimentSetup {
  Grid1D grid;
  FrequencyMesh mesh;
  MaterialProfile profile;
  BathModel bath;
};

inline ExperimentSetup build_setup(const ExperimentConfig& cfg) {
  ExperimentSetup s;
  s.grid = Grid1D(cfg.x_min, cfg.x_max, cfg.grid_n);
  s.mesh = FrequencyMesh::uniform(cfg.mesh_omega_min, cfg.mesh_omega_max, cfg.mesh_n);

  const Eigen::Index n = static_cast<Eigen::Index>(cfg.grid_n);
  Eigen::VectorXd rho(n), w0(n), al(n);
  if (!cfg.material_table.empty()) {
    std::ifstream in(cfg.material_table);
    if (!in) throw validation_error("cannot open material table " + cfg.material_table.string());
    std::string line;
    std::getline(in, line);  // header x,rho,omega0,alpha
    Eigen::Index i = 0;
    while (std::getline(in, line) && i < n) {
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      double x;
      row >> x >> rho[i] >> w0[i] >> al[i];
      ++i;
    }
    if (i != n)
      throw validation_error("material table rows (" + std::to_string(i) +
                             ") do not match the grid (" + std::to_string(n) + ")");
  } else {
    // layers onto nodes; cell midpoints decide the layer, node values sample it
    std::vector<LayerSpec> layers = cfg.layers;
    if (!layers.empty() && !layers.front().explicit_extent) {
      double acc = cfg.x_min;
      for (auto& l : layers) {
        l.x0 = acc;
        l.x1 = acc + l.thickness;
        acc = l.x1;
      }
    }
    std::sort(layers.begin(), layers.end(),
              [](const LayerSpec& a, const LayerSpec& b) { return a.x0 < b.x0; });
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = s.grid.x(static_cast<std::size_t>(i));
      const LayerSpec* pick = &layers.back();
      for (const auto& l : layers)
        if (x < l.x1 || &l == &layers.back()) {
          pick = &l;
          break;
        }
      rho[i] = pick->rho;
      w0[i] = pick->omega0;
      al[i] = pick->alpha;
    }
  }
  s.profile = MaterialProfile(s.grid, rho, w0, al);

  switch (cfg.bath_kind) {
    case ExperimentConfig::BathKind::none:
      s.bath = BathModel::none();
      break;
    case ExperimentConfig::BathKind::drude_lorentz: {
      s.bath = BathModel::drude_lorentz(
          Eigen::VectorXd::Constant(n, cfg.bath_omega_p),
          Eigen::VectorXd::Constant(n, cfg.bath_gamma));
      break;
    }
    case ExperimentConfig::BathKind::tabulated: {
      std::ifstream in(cfg.bath_file);
      if (!in) throw validation_error("cannot open bath file " + cfg.bath_file.string());
      std::string line;
      std::getline(in, line);  // header omega,v
      std::vector<double> ws, vs;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double w, v;
        if (row >> w >> v) {
          ws.push_back(w);
          vs.push_back(v);
        }
      }
      if (ws.size() < 4) throw validation_error("bath file too short");
      FrequencyMesh bm = FrequencyMesh::uniform(ws.front(), ws.back(), ws.size());
      Eigen::MatrixXd vt(n, static_cast<Eigen::Index>(vs.size()));
      for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t k = 0; k < vs.size(); ++k)
          vt(i, static_cast<Eigen::Index>(k)) = al[i] > 0.0 ? vs[k] : 0.0;
      s.bath = BathModel::tabulated(std::move(vt), std::move(bm));
      break;
    }
  }
  return s;
}

}  // namespace dampol
