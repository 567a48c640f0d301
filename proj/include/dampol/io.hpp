#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dampol/errors.hpp"
#include "dampol/grid.hpp"
#include "dampol/material.hpp"

namespace dampol {

using json = nlohmann::json;

/// FNV-1a 64-bit hash, used for config hashes and artifact checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("hash_file: cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest round-trip decimal rendering, byte-stable across runs.
inline std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t grid_hash(const Grid1D& g) {
  std::string s = fmt_g17(g.x_min) + "," + fmt_g17(g.x_max) + "," + std::to_string(g.n_points);
  return fnv1a64(s);
}

class CsvWriter {
public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw validation_error("CsvWriter: cannot open " + path.string());
  }
  void header(const std::string& line) { out_ << line << "\n"; }
  void row(std::initializer_list<double> vals) {
    bool first = true;
    for (double v : vals) {
      if (!first) out_ << ",";
      out_ << fmt_g17(v);
      first = false;
    }
    out_ << "\n";
  }

private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw validation_error("write_json: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

/// chi table as CSV (x, omega, Re chi, Im chi) plus a JSON sidecar.
inline void export_chi_csv(const std::filesystem::path& path, const SusceptibilityTable& t) {
  CsvWriter csv(path);
  csv.header("x,omega,re_chi,im_chi");
  for (Eigen::Index i = 0; i < t.chi.rows(); ++i)
    for (std::size_t j = 0; j < t.mesh.size(); ++j)
      csv.row({t.grid.x(static_cast<std::size_t>(i)), t.mesh.omega[j], t.at(i, j).real(),
               t.at(i, j).imag()});
}

inline json chi_sidecar(const SusceptibilityTable& t, double omega_ref) {
  const char* prov = "computed_from_bath";
  if (t.provenance == SusceptibilityTable::Provenance::preset_closed_form)
    prov = "preset_closed_form";
  else if (t.provenance == SusceptibilityTable::Provenance::lossless_closed_form)
    prov = "lossless_closed_form";
  return json{{"units", {{"omega_ref", omega_ref}, {"length", "c/omega_ref"}}},
              {"grid", {{"x_min", t.grid.x_min}, {"x_max", t.grid.x_max},
                        {"n_points", t.grid.n_points}, {"hash", hex64(grid_hash(t.grid))}}},
              {"mesh", {{"omega_min", t.mesh.front()}, {"omega_max", t.mesh.back()},
                        {"n_points", t.mesh.size()}}},
              {"provenance", prov}};
}

/// Complex kernel as CSV (x, x', Re, Im).
inline void export_kernel_csv(const std::filesystem::path& path, const Grid1D& grid,
                              const Eigen::MatrixXcd& k, const std::string& header) {
  CsvWriter csv(path);
  csv.header(header);
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      csv.row({grid.x(static_cast<std::size_t>(i)), grid.x(static_cast<std::size_t>(j)),
               k(i, j).real(), k(i, j).imag()});
}

/// Raw little-endian dump of a complex matrix (row-major, re/im interleaved).
inline void export_matrix_binary(const std::filesystem::path& path, const Eigen::MatrixXcd& k) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("export_matrix_binary: cannot open " + path.string());
  const std::uint64_t rows = static_cast<std::uint64_t>(k.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(k.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      const double re = k(i, j).real(), im = k(i, j).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof(re));
      out.write(reinterpret_cast<const char*>(&im), sizeof(im));
    }
}

}  // namespace dampol
