#pragma once

// File formats: the .pded binary dataset container, a CSV alternative for
// 1D data, the term-per-line coefficient block, per-epoch trajectory CSVs,
// and human-readable PDE printing. All writes go through a temp-and-rename
// helper so partially written files never appear under the target name.

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdedisc/core.hpp"
#include "pdedisc/optimize.hpp"

namespace pdedisc {

static_assert(std::endian::native == std::endian::little,
              "pded container is little-endian; big-endian hosts unsupported");

namespace detail {

template <typename T>
void put(std::string& buf, T v) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &v, sizeof(T));
  buf.append(tmp, sizeof(T));
}

template <typename T>
T take(const std::string& buf, size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw data_error("pded: truncated file");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

inline std::string format_double(double v) {
  char tmp[64];
  std::snprintf(tmp, sizeof(tmp), "%.17g", v);
  return tmp;
}

}  // namespace detail

// Write `content` to `path` atomically (temp file in the same directory,
// then rename over the target).
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw data_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// .pded binary container
// ---------------------------------------------------------------------------
inline constexpr std::uint16_t kPdedVersion = 1;

inline std::string serialize_pded(const Dataset& ds) {
  ds.validate();
  std::string buf;
  buf.append("PDED", 4);
  detail::put<std::uint16_t>(buf, kPdedVersion);
  detail::put<std::uint8_t>(buf, std::uint8_t(ds.grid.dim()));
  detail::put<std::uint32_t>(buf, std::uint32_t(ds.n_components()));
  for (int d : ds.grid.dims) detail::put<std::uint32_t>(buf, std::uint32_t(d));
  for (double s : ds.grid.spacing) detail::put<double>(buf, s);
  for (double o : ds.grid.origin) detail::put<double>(buf, o);
  detail::put<std::uint8_t>(buf, std::uint8_t(ds.grid.boundary));
  detail::put<std::uint32_t>(buf, std::uint32_t(ds.n_snapshots()));
  for (double t : ds.times) detail::put<double>(buf, t);
  for (const auto& snap : ds.snapshots)
    for (double v : snap.data) detail::put<double>(buf, v);
  return buf;
}

inline Dataset parse_pded(const std::string& buf) {
  size_t pos = 0;
  if (buf.size() < 4 || buf.compare(0, 4, "PDED") != 0) throw data_error("pded: bad magic");
  pos = 4;
  const auto version = detail::take<std::uint16_t>(buf, pos);
  if (version != kPdedVersion) throw data_error("pded: unsupported version");
  const int n = detail::take<std::uint8_t>(buf, pos);
  const int N = int(detail::take<std::uint32_t>(buf, pos));
  if (n < 1 || n > 8 || N < 1) throw data_error("pded: bad rank or component count");
  Dataset ds;
  ds.grid.dims.resize(size_t(n));
  ds.grid.spacing.resize(size_t(n));
  ds.grid.origin.resize(size_t(n));
  for (int a = 0; a < n; ++a) ds.grid.dims[size_t(a)] = int(detail::take<std::uint32_t>(buf, pos));
  for (int a = 0; a < n; ++a) ds.grid.spacing[size_t(a)] = detail::take<double>(buf, pos);
  for (int a = 0; a < n; ++a) ds.grid.origin[size_t(a)] = detail::take<double>(buf, pos);
  const auto b = detail::take<std::uint8_t>(buf, pos);
  if (b > 1) throw data_error("pded: bad boundary enum");
  ds.grid.boundary = Boundary(b);
  const auto count = detail::take<std::uint32_t>(buf, pos);
  ds.times.resize(count);
  for (std::uint32_t j = 0; j < count; ++j) ds.times[j] = detail::take<double>(buf, pos);
  const size_t per = size_t(N) * ds.grid.node_count();
  ds.snapshots.reserve(count);
  for (std::uint32_t j = 0; j < count; ++j) {
    Field f(ds.grid, N);
    for (size_t k = 0; k < per; ++k) f.data[k] = detail::take<double>(buf, pos);
    ds.snapshots.push_back(std::move(f));
  }
  if (pos != buf.size()) throw data_error("pded: trailing bytes");
  ds.validate();
  return ds;
}

inline void write_pded(const std::string& path, const Dataset& ds) {
  write_file_atomic(path, serialize_pded(ds));
}

inline Dataset read_pded(const std::string& path) { return parse_pded(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV dataset (1D interop format): one `t,x,f1[,f2...]` row per node
// ---------------------------------------------------------------------------
inline std::string serialize_csv_dataset(const Dataset& ds) {
  if (ds.grid.dim() != 1) throw data_error("csv dataset format supports 1D data only");
  std::string buf = "t,x";
  for (int c = 0; c < ds.n_components(); ++c) buf += ",f" + std::to_string(c + 1);
  buf += "\n";
  for (size_t j = 0; j < ds.n_snapshots(); ++j)
    for (int k = 0; k < ds.grid.dims[0]; ++k) {
      buf += detail::format_double(ds.times[j]);
      buf += ",";
      buf += detail::format_double(ds.grid.coordinate(0, k));
      for (int c = 0; c < ds.n_components(); ++c) {
        buf += ",";
        buf += detail::format_double(ds.snapshots[j].component(c)[size_t(k)]);
      }
      buf += "\n";
    }
  return buf;
}

inline Dataset parse_csv_dataset(const std::string& text, Boundary boundary = Boundary::ZeroPad) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw data_error("csv dataset: empty file");
  int n_comp = -2;  // columns minus t,x
  std::vector<double> times;
  std::vector<std::vector<double>> rows;  // x, f1..fN per row grouped by time
  std::vector<double> xs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (n_comp == -2) n_comp = int(vals.size()) - 2;
    if (int(vals.size()) != n_comp + 2) throw data_error("csv dataset: ragged row");
    if (times.empty() || vals[0] != times.back()) times.push_back(vals[0]);
    if (times.size() == 1) xs.push_back(vals[1]);
    rows.push_back(std::move(vals));
  }
  if (times.size() < 1 || xs.size() < 2) throw data_error("csv dataset: too small");
  const size_t nx = xs.size();
  if (rows.size() != times.size() * nx) throw data_error("csv dataset: incomplete grid");
  const double dx = xs[1] - xs[0];
  for (size_t k = 1; k < nx; ++k)
    if (std::abs((xs[k] - xs[k - 1]) - dx) > 1e-9 * std::abs(dx))
      throw data_error("csv dataset: non-uniform x grid");
  Dataset ds;
  ds.grid.dims = {int(nx)};
  ds.grid.spacing = {dx};
  ds.grid.origin = {xs[0]};
  ds.grid.boundary = boundary;
  ds.times = times;
  for (size_t j = 0; j < times.size(); ++j) {
    Field f(ds.grid, n_comp);
    for (size_t k = 0; k < nx; ++k) {
      const auto& row = rows[j * nx + k];
      for (int c = 0; c < n_comp; ++c) f.component(c)[k] = row[size_t(c) + 2];
    }
    ds.snapshots.push_back(std::move(f));
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Coefficient text block: one `i d1,...,dn p1,...,pN value` line per term
// ---------------------------------------------------------------------------
inline std::string format_coefficients(const TermLibrary& lib, const CoefficientVector& alpha) {
  if (alpha.size() != lib.size())
    throw std::invalid_argument("format_coefficients: size mismatch");
  std::string buf;
  for (size_t t = 0; t < lib.size(); ++t)
    buf += to_string(lib.terms[t]) + " " + detail::format_double(alpha[t]) + "\n";
  return buf;
}

inline std::pair<TermLibrary, CoefficientVector> parse_coefficients(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<TermKey, double>> entries;
  auto parse_multi = [](const std::string& s) {
    std::vector<int> v;
    std::istringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stoi(cell));
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    TermKey key;
    std::string dstr, pstr;
    double value;
    if (!(ls >> key.eq_index >> dstr >> pstr >> value))
      throw data_error("coefficients: malformed line: " + line);
    key.deriv = parse_multi(dstr);
    key.power = parse_multi(pstr);
    entries.emplace_back(std::move(key), value);
  }
  if (entries.empty()) throw data_error("coefficients: no terms");
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  TermLibrary lib;
  lib.spatial_dim = int(entries.front().first.deriv.size());
  lib.n_equations = int(entries.front().first.power.size());
  CoefficientVector alpha(entries.size(), 0.0);
  for (size_t t = 0; t < entries.size(); ++t) {
    const auto& [key, value] = entries[t];
    if (int(key.deriv.size()) != lib.spatial_dim || int(key.power.size()) != lib.n_equations)
      throw data_error("coefficients: inconsistent multi-index lengths");
    lib.terms.push_back(key);
    alpha[t] = value;
    lib.d_max = std::max(lib.d_max, key.deriv_order());
    lib.p_max = std::max(lib.p_max, key.power_order());
  }
  if (std::adjacent_find(lib.terms.begin(), lib.terms.end()) != lib.terms.end())
    throw data_error("coefficients: duplicate term");
  return {std::move(lib), std::move(alpha)};
}

inline void write_coefficients(const std::string& path, const TermLibrary& lib,
                               const CoefficientVector& alpha) {
  write_file_atomic(path, format_coefficients(lib, alpha));
}

inline std::pair<TermLibrary, CoefficientVector> read_coefficients(const std::string& path) {
  return parse_coefficients(read_file(path));
}

// ---------------------------------------------------------------------------
// Per-epoch trajectory CSV: epoch,term_0,...,term_K,l2_residual
// ---------------------------------------------------------------------------
inline std::string serialize_trajectories_csv(const DiscoveryReport& report) {
  std::string buf = "epoch";
  const size_t n_terms = report.final_alpha.size();
  for (size_t t = 0; t < n_terms; ++t) buf += ",term_" + std::to_string(t);
  buf += ",l2_residual\n";
  for (size_t e = 0; e < report.per_epoch_alpha.size(); ++e) {
    buf += std::to_string(e + 1);
    for (double v : report.per_epoch_alpha[e]) buf += "," + detail::format_double(v);
    buf += "," + detail::format_double(report.per_epoch_l2_residual[e]) + "\n";
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Human-readable recovered PDE, terms moved to the right-hand side
// ---------------------------------------------------------------------------
namespace detail {

inline std::string component_name(int c, int N) {
  return N == 1 ? "f" : "f" + std::to_string(c + 1);
}

inline std::string axis_name(int a, int n) { return n == 1 ? "x" : "x" + std::to_string(a + 1); }

inline std::string term_name(const TermKey& key, int n, int N) {
  std::string mono;
  int factors = 0;
  for (int c = 0; c < N; ++c) {
    const int p = key.power[size_t(c)];
    if (p == 0) continue;
    if (!mono.empty()) mono += " ";
    mono += component_name(c, N);
    if (p > 1) mono += "^" + std::to_string(p);
    ++factors;
  }
  const bool composite = factors > 1 || key.power_order() > 1;
  if (key.deriv_order() == 0) return composite && factors > 1 ? "(" + mono + ")" : mono;
  std::string sub;
  for (int a = 0; a < n; ++a)
    for (int d = 0; d < key.deriv[size_t(a)]; ++d) sub += axis_name(a, n);
  if (composite) return "(" + mono + ")_" + sub;
  return mono + "_" + sub;
}

}  // namespace detail

inline std::string recovered_pde_string(const TermLibrary& lib, const CoefficientVector& alpha) {
  if (alpha.size() != lib.size())
    throw std::invalid_argument("recovered_pde_string: size mismatch");
  std::string out;
  for (int eq = 0; eq < lib.n_equations; ++eq) {
    std::string line = detail::component_name(eq, lib.n_equations) + "_t =";
    bool any = false;
    for (size_t t = 0; t < lib.size(); ++t) {
      const TermKey& key = lib.terms[t];
      if (key.eq_index != eq || alpha[t] == 0.0) continue;
      const double rhs_coeff = -alpha[t];  // move to the right-hand side
      char num[32];
      std::snprintf(num, sizeof(num), "%.6f", std::abs(rhs_coeff));
      line += any ? (rhs_coeff < 0 ? " - " : " + ") : (rhs_coeff < 0 ? " -" : " ");
      line += std::string(num) + " " + detail::term_name(key, lib.spatial_dim, lib.n_equations);
      any = true;
    }
    if (!any) line += " 0";
    if (eq) out += "\n";
    out += line;
  }
  return out;
}

}  // namespace pdedisc
