#pragma once

// Benchmark dataset generators. The PDE-driven problems are produced with
// the same forward solver used by discovery, so a discovery run evaluated at
// the generating coefficients reproduces the data exactly.

#include <cstdint>
#include <map>
#include <string>

#include "pdedisc/core.hpp"
#include "pdedisc/forward.hpp"
#include "pdedisc/rng.hpp"

namespace pdedisc {

enum class Problem {
  Heat1D,
  Heat2D,
  Burgers1D,
  Burgers2D,
  KS1D,
  RandomWalk1D,
  ReactionDiffusion2D,
  Wave1D,
};

inline const char* to_string(Problem p) {
  switch (p) {
    case Problem::Heat1D: return "heat1d";
    case Problem::Heat2D: return "heat2d";
    case Problem::Burgers1D: return "burgers1d";
    case Problem::Burgers2D: return "burgers2d";
    case Problem::KS1D: return "ks";
    case Problem::RandomWalk1D: return "randomwalk";
    case Problem::ReactionDiffusion2D: return "reactiondiffusion2d";
    case Problem::Wave1D: return "wave";
  }
  return "?";
}

inline Problem problem_from_string(const std::string& s) {
  if (s == "heat1d") return Problem::Heat1D;
  if (s == "heat2d") return Problem::Heat2D;
  if (s == "burgers1d") return Problem::Burgers1D;
  if (s == "burgers2d") return Problem::Burgers2D;
  if (s == "ks" || s == "ks1d") return Problem::KS1D;
  if (s == "randomwalk" || s == "randomwalk1d") return Problem::RandomWalk1D;
  if (s == "reactiondiffusion2d" || s == "rd2d") return Problem::ReactionDiffusion2D;
  if (s == "wave" || s == "wave1d") return Problem::Wave1D;
  throw data_error("unknown problem: " + s);
}

struct ProblemSpec {
  Problem name = Problem::Heat1D;
  std::optional<int> nx;  // nodes along x1
  std::optional<int> ny;  // nodes along x2 (2D problems)
  std::optional<int> nt;  // number of data intervals / EM steps
  std::optional<std::uint64_t> seed;
  std::optional<int> n_samples;                 // RandomWalk
  std::optional<double> domain_lo, domain_hi;   // RandomWalk histogram domain
  bool include_t0 = true;                       // RandomWalk: keep the t=0 histogram
  std::map<std::string, double> coefficients;   // physical coefficient overrides

  double coeff(const std::string& key, double fallback) const {
    auto it = coefficients.find(key);
    return it == coefficients.end() ? fallback : it->second;
  }
};

struct GeneratedData {
  Dataset data;
  CoefficientVector truth;  // over `library`, in the forward-model sign convention
  TermLibrary library;
  std::string dt_rule;
  double dt = 0.0;
  std::uint64_t seed = 0;
  long clipped_samples = 0;
};

namespace detail {

// March the truth model with one Euler step per data interval (no stability
// cap), recording every snapshot.
inline Dataset march(const Grid& grid, const Field& ic, const TermLibrary& lib,
                     const CoefficientVector& truth, double dt, int nt) {
  Dataset ds;
  ds.grid = grid;
  ds.times.resize(size_t(nt) + 1);
  for (int j = 0; j <= nt; ++j) ds.times[size_t(j)] = dt * j;
  ds.snapshots.reserve(size_t(nt) + 1);
  ds.snapshots.push_back(ic);
  Hyperparameters ghp;
  ghp.substeps = 1;
  ghp.cfl_safety = 1e300;  // the stated dt rule is authoritative here
  for (int j = 0; j < nt; ++j) {
    SolveTrace trace = solve_interval(ds.snapshots[size_t(j)], ds.times[size_t(j)],
                                      ds.times[size_t(j) + 1], lib, truth, ghp);
    if (trace.blown_up)
      throw numerical_error("dataset generation blew up at step " + std::to_string(j) +
                            " with dt=" + std::to_string(dt));
    ds.snapshots.push_back(trace.fields.back());
  }
  return ds;
}

inline std::vector<std::vector<int>> axis_pure_derivs(int n, int dmax, bool include_zero) {
  std::vector<std::vector<int>> out;
  if (include_zero) out.push_back(std::vector<int>(size_t(n), 0));
  for (int a = 0; a < n; ++a)
    for (int d = 1; d <= dmax; ++d) {
      std::vector<int> v(size_t(n), 0);
      v[size_t(a)] = d;
      out.push_back(v);
    }
  return out;
}

inline std::vector<std::vector<int>> powers_up_to(int N, int pmax) {
  // all multi-indices with 1 <= |p| <= pmax
  std::vector<std::vector<int>> out;
  std::vector<int> cur(size_t(N), 0);
  auto rec = [&](auto&& self, int comp) -> void {
    if (comp == N) {
      int s = 0;
      for (int v : cur) s += v;
      if (s >= 1 && s <= pmax) out.push_back(cur);
      return;
    }
    for (int v = 0; v <= pmax; ++v) {
      cur[size_t(comp)] = v;
      self(self, comp + 1);
    }
    cur[size_t(comp)] = 0;
  };
  rec(rec, 0);
  return out;
}

}  // namespace detail

// Euler-Maruyama sample paths X += A dt + sqrt(2 D dt) xi binned into a
// fixed histogram; densities normalized so that sum(rho) * dx = 1.
inline Dataset euler_maruyama_histogram(double drift, double diffusion, int n_steps, double dt,
                                        int n_samples, int bins, double lo, double hi,
                                        std::uint64_t seed, long* clipped_out = nullptr) {
  if (diffusion < 0) throw std::invalid_argument("euler_maruyama_histogram: D must be >= 0");
  if (!(hi > lo)) throw std::invalid_argument("euler_maruyama_histogram: empty domain");
  if (bins < 1 || n_samples < 1 || n_steps < 0)
    throw std::invalid_argument("euler_maruyama_histogram: bad counts");

  const double dx = (hi - lo) / bins;
  Grid grid;
  grid.dims = {bins};
  grid.spacing = {dx};
  grid.origin = {lo + 0.5 * dx};  // bin centers
  grid.boundary = Boundary::ZeroPad;

  std::vector<double> x(size_t(n_samples), 0.0);
  std::vector<SplitMix64> streams;
  streams.reserve(size_t(n_samples));
  for (int s = 0; s < n_samples; ++s) streams.push_back(SplitMix64::stream(seed, std::uint64_t(s)));

  long clipped = 0;
  auto histogram = [&]() {
    Field f(grid, 1);
    auto v = f.component(0);
    for (double xi : x) {
      int b = int(std::floor((xi - lo) / dx));
      if (b < 0) {
        b = 0;
        ++clipped;
      } else if (b >= bins) {
        b = bins - 1;
        ++clipped;
      }
      v[size_t(b)] += 1.0;
    }
    const double norm = 1.0 / (double(n_samples) * dx);
    for (double& d : v) d *= norm;
    return f;
  };

  Dataset ds;
  ds.grid = grid;
  ds.times.reserve(size_t(n_steps) + 1);
  ds.snapshots.reserve(size_t(n_steps) + 1);
  ds.times.push_back(0.0);
  ds.snapshots.push_back(histogram());
  const double noise_scale = std::sqrt(2.0 * diffusion * dt);
  for (int step = 1; step <= n_steps; ++step) {
    for (int s = 0; s < n_samples; ++s)
      x[size_t(s)] += drift * dt + noise_scale * streams[size_t(s)].next_normal();
    ds.times.push_back(dt * step);
    ds.snapshots.push_back(histogram());
  }
  if (clipped_out) *clipped_out = clipped;
  return ds;
}

// Generate one benchmark problem: dataset, generating coefficients in the
// forward-model sign convention, and the candidate library used for it.
inline GeneratedData generate(const ProblemSpec& spec) {
  GeneratedData out;
  out.seed = spec.seed.value_or(0);

  auto grid1d = [&](int n_nodes, double length, Boundary b) {
    Grid g;
    g.dims = {n_nodes};
    g.spacing = {length / n_nodes};
    g.origin = {0.0};
    g.boundary = b;
    return g;
  };
  auto grid2d = [&](int n1, int n2, double l1, double l2, Boundary b) {
    Grid g;
    g.dims = {n1, n2};
    g.spacing = {l1 / n1, l2 / n2};
    g.origin = {0.0, 0.0};
    g.boundary = b;
    return g;
  };
  auto set_truth = [&](const TermKey& key, double value) {
    auto slot = out.library.find(key);
    if (!slot) throw std::logic_error("generate: truth term missing from library");
    out.truth[*slot] = value;
  };

  switch (spec.name) {
    case Problem::Heat1D: {
      const int nx = spec.nx.value_or(100);
      const int nt = spec.nt.value_or(100);
      const double L = 1.0;
      const double D = spec.coeff("D", -1.0);
      Grid grid = grid1d(nx, L, Boundary::ZeroPad);
      const double dx = grid.spacing[0];
      out.dt = 0.05 * dx * dx / std::abs(D);
      out.dt_rule = "dt = 0.05*dx^2/|D|";
      Field ic(grid, 1);
      auto v = ic.component(0);
      for (int k = 0; k < nx; ++k) {
        const double x = grid.coordinate(0, k);
        v[size_t(k)] = 5.0 * std::sin(2.0 * M_PI * x) * x * (x - L);
      }
      out.library = build_library(1, 1, {{1}, {2}, {3}}, {{1}, {2}, {3}});
      out.truth = CoefficientVector(out.library.size(), 0.0);
      set_truth(TermKey{0, {2}, {1}}, D);
      out.data = detail::march(grid, ic, out.library, out.truth, out.dt, nt);
      break;
    }
    case Problem::Burgers1D: {
      const int nx = spec.nx.value_or(100);
      const int nt = spec.nt.value_or(100);
      const double L = 1.0;
      const double A = spec.coeff("A", -1.0);
      Grid grid = grid1d(nx, L, Boundary::ZeroPad);
      const double dx = grid.spacing[0];
      out.dt = 0.05 * dx / std::abs(A);
      out.dt_rule = "dt = 0.05*dx/|A|";
      Field ic(grid, 1);
      auto v = ic.component(0);
      for (int k = 0; k < nx; ++k) {
        const double x = grid.coordinate(0, k);
        v[size_t(k)] = 5.0 * std::sin(2.0 * M_PI * x) * x * (x - L);
      }
      out.library = build_library(1, 1, {{1}, {2}, {3}}, {{1}, {2}, {3}});
      out.truth = CoefficientVector(out.library.size(), 0.0);
      set_truth(TermKey{0, {1}, {2}}, A);
      out.data = detail::march(grid, ic, out.library, out.truth, out.dt, nt);
      break;
    }
    case Problem::Heat2D: {
      const int n1 = spec.nx.value_or(50);
      const int n2 = spec.ny.value_or(spec.nx.value_or(50));
      const int nt = spec.nt.value_or(20);
      const double D = spec.coeff("D", -1.0);
      const double b = spec.coeff("b", 20.0), c = spec.coeff("c", 20.0);
      Grid grid = grid2d(n1, n2, 1.0, 1.0, Boundary::ZeroPad);
      const double dx = grid.min_spacing();
      out.dt = 0.05 * dx * dx / std::abs(D);
      out.dt_rule = "dt = 0.05*min(dx)^2/|D|";
      Field ic(grid, 1);
      auto v = ic.component(0);
      detail::for_each_node(grid, [&](size_t k, const std::vector<int>& idx) {
        const double x1 = grid.coordinate(0, idx[0]) - 0.5;
        const double x2 = grid.coordinate(1, idx[1]) - 0.5;
        const double r2 = x1 * x1 + x2 * x2;
        v[k] = std::exp(-b * r2) * std::cos(2.0 * c * M_PI * r2);
      });
      out.library = build_library(2, 1, detail::axis_pure_derivs(2, 2, false), {{1}, {2}, {3}});
      out.truth = CoefficientVector(out.library.size(), 0.0);
      set_truth(TermKey{0, {2, 0}, {1}}, D);
      set_truth(TermKey{0, {0, 2}, {1}}, D);
      out.data = detail::march(grid, ic, out.library, out.truth, out.dt, nt);
      break;
    }
    case Problem::Burgers2D: {
      const int n1 = spec.nx.value_or(50);
      const int n2 = spec.ny.value_or(spec.nx.value_or(50));
      const int nt = spec.nt.value_or(20);
      const double A = spec.coeff("A", -1.0);
      const double b = spec.coeff("b", 30.0);
      Grid grid = grid2d(n1, n2, 1.0, 1.0, Boundary::ZeroPad);
      out.dt = 0.05 * grid.min_spacing() / std::abs(A);
      out.dt_rule = "dt = 0.05*min(dx)/|A|";
      Field ic(grid, 1);
      auto v = ic.component(0);
      detail::for_each_node(grid, [&](size_t k, const std::vector<int>& idx) {
        const double x1 = grid.coordinate(0, idx[0]) - 0.5;
        const double x2 = grid.coordinate(1, idx[1]) - 0.5;
        v[k] = std::exp(-b * (x1 * x1 + x2 * x2));
      });
      out.library = build_library(2, 1, detail::axis_pure_derivs(2, 2, false), {{1}, {2}, {3}});
      out.truth = CoefficientVector(out.library.size(), 0.0);
      set_truth(TermKey{0, {1, 0}, {2}}, A);
      set_truth(TermKey{0, {0, 1}, {2}}, A);
      out.data = detail::march(grid, ic, out.library, out.truth, out.dt, nt);
      break;
    }
    case Problem::KS1D: {
      const int nx = spec.nx.value_or(256);
      const int nt = spec.nt.value_or(64);
      const double L = 1.0;
      const double A = spec.coeff("A", -1.0);
      const double B = spec.coeff("B", 0.5);
      const double C = spec.coeff("C", -0.5);
      Grid grid = grid1d(nx, L, Boundary::Periodic);
      const double dx = grid.spacing[0];
      out.dt = 0.01 * dx * dx * dx * dx / std::abs(C);
      out.dt_rule = "dt = 0.01*dx^4/|C|";
      Field ic(grid, 1);
      auto v = ic.component(0);
      for (int k = 0; k < nx; ++k) {
        const double x = grid.coordinate(0, k);
        v[size_t(k)] = 5.0 * std::sin(2.0 * M_PI * x) * x * (x - L);
      }
      out.library = build_library(1, 1, {{1}, {2}, {3}, {4}}, {{1}, {2}});
      out.truth = CoefficientVector(out.library.size(), 0.0);
      set_truth(TermKey{0, {1}, {2}}, A);
      set_truth(TermKey{0, {2}, {1}}, B);
      set_truth(TermKey{0, {4}, {1}}, C);
      out.data = detail::march(grid, ic, out.library, out.truth, out.dt, nt);
      break;
    }
    case Problem::RandomWalk1D: {
      const int bins = spec.nx.value_or(100);
      const int nt = spec.nt.value_or(50);
      const int ns = spec.n_samples.value_or(1000);
      const double A = spec.coeff("A", 1.0);
      const double D = spec.coeff("D", 0.5);
      const double lo = spec.domain_lo.value_or(-2.0);
      const double hi = spec.domain_hi.value_or(4.0);
      out.dt = spec.coeff("dt", 0.01);
      out.dt_rule = "dt = 0.01 (Euler-Maruyama)";
      out.data = euler_maruyama_histogram(A, D, nt, out.dt, ns, bins, lo, hi, out.seed,
                                          &out.clipped_samples);
      if (!spec.include_t0) {
        out.data.times.erase(out.data.times.begin());
        out.data.snapshots.erase(out.data.snapshots.begin());
      }
      out.library = build_library(1, 1, {{1}, {2}, {3}}, {{1}});
      out.truth = CoefficientVector(out.library.size(), 0.0);
      set_truth(TermKey{0, {1}, {1}}, A);
      set_truth(TermKey{0, {2}, {1}}, -D);
      break;
    }
    case Problem::ReactionDiffusion2D: {
      const int n1 = spec.nx.value_or(50);
      const int n2 = spec.ny.value_or(spec.nx.value_or(50));
      const int nt = spec.nt.value_or(25);
      const double a = spec.coeff("a", 100.0);
      const double L1 = 1.0, L2 = 1.0;
      const std::vector<double> cu = {-0.1, -0.2, -0.3, -0.4, 0.1, 0.2, 0.3};
      const std::vector<double> cv = {-0.4, -0.3, -0.2, -0.1, 0.3, 0.2, 0.1};
      Grid grid = grid2d(n1, n2, L1, L2, Boundary::ZeroPad);
      out.dt = spec.coeff("dt", 1e-6);
      out.dt_rule = "dt = 1e-6";
      Field ic(grid, 2);
      auto u = ic.component(0);
      auto v = ic.component(1);
      detail::for_each_node(grid, [&](size_t k, const std::vector<int>& idx) {
        const double x1 = grid.coordinate(0, idx[0]);
        const double x2 = grid.coordinate(1, idx[1]);
        const double bump = (L1 * x1 - x1 * x1) * (L2 * x2 - x2 * x2);
        u[k] = a * std::sin(4.0 * M_PI * x1 / L1) * std::cos(3.0 * M_PI * x2 / L2) * bump;
        v[k] = a * std::cos(4.0 * M_PI * x1 / L1) * std::sin(3.0 * M_PI * x2 / L2) * bump;
      });
      out.library =
          build_library(2, 2, detail::axis_pure_derivs(2, 2, true), detail::powers_up_to(2, 3));
      out.truth = CoefficientVector(out.library.size(), 0.0);
      // u-equation
      set_truth(TermKey{0, {2, 0}, {1, 0}}, cu[0]);
      set_truth(TermKey{0, {0, 2}, {1, 0}}, cu[1]);
      set_truth(TermKey{0, {0, 0}, {1, 0}}, cu[2]);
      set_truth(TermKey{0, {0, 0}, {3, 0}}, cu[3]);
      set_truth(TermKey{0, {0, 0}, {1, 2}}, cu[4]);
      set_truth(TermKey{0, {0, 0}, {2, 1}}, cu[5]);
      set_truth(TermKey{0, {0, 0}, {0, 3}}, cu[6]);
      // v-equation
      set_truth(TermKey{1, {2, 0}, {0, 1}}, cv[0]);
      set_truth(TermKey{1, {0, 2}, {0, 1}}, cv[1]);
      set_truth(TermKey{1, {0, 0}, {0, 1}}, cv[2]);
      set_truth(TermKey{1, {0, 0}, {0, 3}}, cv[3]);
      set_truth(TermKey{1, {0, 0}, {2, 1}}, cv[4]);
      set_truth(TermKey{1, {0, 0}, {1, 2}}, cv[5]);
      set_truth(TermKey{1, {0, 0}, {3, 0}}, cv[6]);
      out.data = detail::march(grid, ic, out.library, out.truth, out.dt, nt);
      break;
    }
    case Problem::Wave1D: {
      const int nx = spec.nx.value_or(100);
      const int nt = spec.nt.value_or(10);
      const double T = spec.coeff("T", 1.0);
      Grid grid = grid1d(nx, 2.0 * M_PI, Boundary::Periodic);
      out.dt = T / nt;
      out.dt_rule = "dt = T/Nt (exact analytic snapshots)";
      Dataset ds;
      ds.grid = grid;
      for (int j = 0; j <= nt; ++j) {
        const double t = out.dt * j;
        Field f(grid, 1);
        auto v = f.component(0);
        for (int k = 0; k < nx; ++k) v[size_t(k)] = std::sin(grid.coordinate(0, k) - t);
        ds.times.push_back(t);
        ds.snapshots.push_back(std::move(f));
      }
      out.data = std::move(ds);
      out.library = build_library(1, 1, {{1}, {2}, {3}, {4}, {5}, {6}}, {{1}});
      out.truth = CoefficientVector(out.library.size(), 0.0);
      set_truth(TermKey{0, {1}, {1}}, 1.0);
      break;
    }
  }
  out.data.validate();
  return out;
}

}  // namespace pdedisc
