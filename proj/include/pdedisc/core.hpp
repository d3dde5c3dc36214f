#pragma once

// Domain types shared across the library: candidate-term bookkeeping,
// grids, fields, datasets, and the optimizer hyperparameters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdedisc {

// Thrown when an input file or dataset violates a structural contract.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a computation diverges (non-finite state, blown-up solves).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double ipow(double x, int p) {
  if (p < 0) return 1.0 / ipow(x, -p);
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// TermKey: one candidate term, identified by the equation it belongs to,
// a per-axis derivative multi-index and a per-component power multi-index.
// ---------------------------------------------------------------------------
struct TermKey {
  int eq_index = 0;
  std::vector<int> deriv;  // length = spatial dimension
  std::vector<int> power;  // length = number of equations

  int deriv_order() const { return std::accumulate(deriv.begin(), deriv.end(), 0); }
  int power_order() const { return std::accumulate(power.begin(), power.end(), 0); }

  friend bool operator==(const TermKey&, const TermKey&) = default;
  friend bool operator<(const TermKey& a, const TermKey& b) {
    if (a.eq_index != b.eq_index) return a.eq_index < b.eq_index;
    if (a.deriv != b.deriv) return a.deriv < b.deriv;
    return a.power < b.power;
  }
};

inline std::string to_string(const TermKey& t) {
  std::string s = std::to_string(t.eq_index) + " ";
  for (size_t i = 0; i < t.deriv.size(); ++i)
    s += (i ? "," : "") + std::to_string(t.deriv[i]);
  s += " ";
  for (size_t i = 0; i < t.power.size(); ++i)
    s += (i ? "," : "") + std::to_string(t.power[i]);
  return s;
}

// ---------------------------------------------------------------------------
// TermLibrary: ordered, duplicate-free set of terms. d_max / p_max are
// recomputed from the terms, never trusted from input.
// ---------------------------------------------------------------------------
struct TermLibrary {
  std::vector<TermKey> terms;
  int spatial_dim = 1;   // n
  int n_equations = 1;   // N
  int d_max = 0;
  int p_max = 0;

  size_t size() const { return terms.size(); }

  std::optional<size_t> find(const TermKey& key) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), key);
    if (it != terms.end() && *it == key) return size_t(it - terms.begin());
    return std::nullopt;
  }
};

// Cross product deriv_set x power_set, replicated per equation, in
// lexicographic (eq_index, deriv, power) order.
inline TermLibrary build_library(int n, int N,
                                 const std::vector<std::vector<int>>& deriv_set,
                                 const std::vector<std::vector<int>>& power_set) {
  if (n < 1 || N < 1) throw std::invalid_argument("build_library: n and N must be >= 1");
  TermLibrary lib;
  lib.spatial_dim = n;
  lib.n_equations = N;
  for (const auto& d : deriv_set) {
    if (int(d.size()) != n)
      throw std::invalid_argument("build_library: derivative multi-index length != n");
    for (int v : d)
      if (v < 0) throw std::invalid_argument("build_library: negative derivative order");
  }
  for (const auto& p : power_set) {
    if (int(p.size()) != N)
      throw std::invalid_argument("build_library: power multi-index length != N");
    int sum = 0;
    for (int v : p) {
      if (v < 0) throw std::invalid_argument("build_library: negative power");
      sum += v;
    }
    if (sum == 0) throw std::invalid_argument("build_library: all-zero power vector not allowed");
  }
  for (int eq = 0; eq < N; ++eq)
    for (const auto& d : deriv_set)
      for (const auto& p : power_set) lib.terms.push_back(TermKey{eq, d, p});
  std::sort(lib.terms.begin(), lib.terms.end());
  if (std::adjacent_find(lib.terms.begin(), lib.terms.end()) != lib.terms.end())
    throw std::invalid_argument("build_library: duplicate term");
  lib.d_max = 0;
  lib.p_max = 0;
  for (const auto& t : lib.terms) {
    lib.d_max = std::max(lib.d_max, t.deriv_order());
    lib.p_max = std::max(lib.p_max, t.power_order());
  }
  return lib;
}

// ---------------------------------------------------------------------------
// CoefficientVector: the optimization unknown, one value per library term.
// ---------------------------------------------------------------------------
struct CoefficientVector {
  std::vector<double> values;

  CoefficientVector() = default;
  explicit CoefficientVector(size_t n, double fill = 0.0) : values(n, fill) {}
  explicit CoefficientVector(std::vector<double> v) : values(std::move(v)) {}

  size_t size() const { return values.size(); }
  double& operator[](size_t i) { return values[i]; }
  double operator[](size_t i) const { return values[i]; }

  bool finite() const { return detail::all_finite(values); }
};

inline double coefficient_l1_error(const CoefficientVector& est, const CoefficientVector& truth) {
  if (est.size() != truth.size())
    throw std::invalid_argument("coefficient_l1_error: length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < est.size(); ++i) s += std::abs(est[i] - truth[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------
enum class Boundary : std::uint8_t { ZeroPad = 0, Periodic = 1 };

struct Grid {
  std::vector<int> dims;
  std::vector<double> spacing;
  std::vector<double> origin;
  Boundary boundary = Boundary::ZeroPad;

  int dim() const { return int(dims.size()); }

  size_t node_count() const {
    size_t n = 1;
    for (int d : dims) n *= size_t(d);
    return n;
  }

  double min_spacing() const {
    return *std::min_element(spacing.begin(), spacing.end());
  }

  double cell_volume() const {
    double v = 1.0;
    for (double s : spacing) v *= s;
    return v;
  }

  double coordinate(int axis, int index) const {
    return origin[axis] + spacing[axis] * index;
  }

  void validate() const {
    if (dims.empty() || dims.size() != spacing.size() || dims.size() != origin.size())
      throw data_error("Grid: dims/spacing/origin must have equal nonzero length");
    for (int d : dims)
      if (d < 1) throw data_error("Grid: dims must be positive");
    for (double s : spacing)
      if (!(s > 0.0)) throw data_error("Grid: spacing must be strictly positive");
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

// ---------------------------------------------------------------------------
// Field: N-component nodal values, stored component-major, row-major per
// component (last axis fastest).
// ---------------------------------------------------------------------------
struct Field {
  Grid grid;
  int n_components = 1;
  std::vector<double> data;

  Field() = default;
  Field(Grid g, int n) : grid(std::move(g)), n_components(n) {
    data.assign(size_t(n_components) * grid.node_count(), 0.0);
  }

  std::span<double> component(int c) {
    const size_t nodes = grid.node_count();
    return {data.data() + size_t(c) * nodes, nodes};
  }
  std::span<const double> component(int c) const {
    const size_t nodes = grid.node_count();
    return {data.data() + size_t(c) * nodes, nodes};
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data) m = std::max(m, std::abs(x));
    return m;
  }

  bool finite() const { return detail::all_finite(data); }

  void validate() const {
    grid.validate();
    if (n_components < 1) throw data_error("Field: n_components must be positive");
    if (data.size() != size_t(n_components) * grid.node_count())
      throw data_error("Field: data size does not match grid");
    if (!finite()) throw data_error("Field: non-finite entry");
  }
};

// ---------------------------------------------------------------------------
// Dataset: snapshots of one Field at strictly increasing times.
// ---------------------------------------------------------------------------
struct Dataset {
  Grid grid;
  std::vector<double> times;
  std::vector<Field> snapshots;

  int n_components() const { return snapshots.empty() ? 0 : snapshots.front().n_components; }
  size_t n_snapshots() const { return snapshots.size(); }

  void validate() const {
    grid.validate();
    if (times.size() != snapshots.size())
      throw data_error("Dataset: times/snapshots count mismatch");
    for (size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw data_error("Dataset: times must be strictly increasing");
    for (const auto& f : snapshots) {
      if (!(f.grid == grid)) throw data_error("Dataset: snapshot grid mismatch");
      if (f.n_components != n_components()) throw data_error("Dataset: component count mismatch");
      f.validate();
    }
  }
};

// ---------------------------------------------------------------------------
// Hyperparameters for the discovery loop. Defaults follow the usual
// thresholded-gradient-descent settings; beta is problem dependent.
// ---------------------------------------------------------------------------
enum class ThresholdMode { During, FinalOnly };

struct Hyperparameters {
  double beta = 1e-3;        // learning-rate free parameter
  double eps0 = 1e-12;       // ridge factor
  double sigma_thr = 1e-3;   // hard threshold
  int n_thr = 100;           // epochs before thresholding kicks in
  double gamma = 1e-9;       // final convergence tolerance on max-abs alpha change
  double gamma_thr = 1e-6;   // thresholding-trigger tolerance
  int max_epochs = 1000;
  int substeps = 1;          // internal time substeps per data interval
  double cfl_safety = 0.05;
  bool averaging = false;    // average gradients over intervals before updating
  bool ridge_per_interval = false;  // add 2*eps0*alpha inside each interval gradient
  ThresholdMode threshold_mode = ThresholdMode::During;
  int threads = 1;

  void validate() const {
    if (!(beta > 0)) throw std::invalid_argument("Hyperparameters: beta must be > 0");
    if (eps0 < 0 || sigma_thr < 0 || gamma < 0 || gamma_thr < 0 || cfl_safety <= 0)
      throw std::invalid_argument("Hyperparameters: negative tolerance");
    if (n_thr < 1 || max_epochs < 1 || substeps < 1 || threads < 1)
      throw std::invalid_argument("Hyperparameters: counts must be positive");
  }
};

}  // namespace pdedisc
