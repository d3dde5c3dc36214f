#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "pdedisc/adjoint.hpp"
#include "pdedisc/datagen.hpp"
#include "pdedisc/optimize.hpp"

using namespace pdedisc;

namespace {

Grid line_grid(int n, double length, Boundary b) {
  Grid g;
  g.dims = {n};
  g.spacing = {length / n};
  g.origin = {0.0};
  g.boundary = b;
  return g;
}

Field constant_field(const Grid& g, double value) {
  Field f(g, 1);
  for (auto& x : f.component(0)) x = value;
  return f;
}

// Discretized cost over the dataset's intervals: cell_volume-weighted
// squared endpoint mismatch plus the ridge term. This is the quantity whose
// gradient the adjoint quadrature approximates.
double cost_of(const Dataset& data, const TermLibrary& lib, const CoefficientVector& alpha,
               const Hyperparameters& hp, double eps0) {
  double c = 0.0;
  for (size_t j = 0; j + 1 < data.n_snapshots(); ++j) {
    SolveTrace tr =
        solve_interval(data.snapshots[j], data.times[j], data.times[j + 1], lib, alpha, hp);
    REQUIRE_FALSE(tr.blown_up);
    const Field& f_end = tr.fields.back();
    const Field& fstar = data.snapshots[j + 1];
    double s = 0.0;
    for (size_t k = 0; k < f_end.data.size(); ++k) {
      const double d = fstar.data[k] - f_end.data[k];
      s += d * d;
    }
    c += s * data.grid.cell_volume();
  }
  for (size_t t = 0; t < alpha.size(); ++t) c += eps0 * alpha[t] * alpha[t];
  return c;
}

CoefficientVector adjoint_gradient(const Dataset& data, const TermLibrary& lib,
                                   const CoefficientVector& alpha, const Hyperparameters& hp,
                                   double eps0) {
  CoefficientVector g(lib.size(), 0.0);
  for (size_t j = 0; j + 1 < data.n_snapshots(); ++j) {
    SolveTrace tr =
        solve_interval(data.snapshots[j], data.times[j], data.times[j + 1], lib, alpha, hp);
    REQUIRE_FALSE(tr.blown_up);
    AdjointTrace adj = solve_adjoint_interval(tr, data.snapshots[j + 1], lib, alpha, hp);
    REQUIRE_FALSE(adj.blown_up);
    CoefficientVector gj = gradient_interval(tr, adj, lib, alpha, 0.0);
    for (size_t t = 0; t < g.size(); ++t) g[t] += gj[t];
  }
  for (size_t t = 0; t < g.size(); ++t) g[t] += 2.0 * eps0 * alpha[t];
  return g;
}

}  // namespace

TEST_CASE("final_condition: lambda = 2 (f* - f)") {
  Grid g = line_grid(10, 1.0, Boundary::ZeroPad);
  Field f = constant_field(g, 1.0);
  Field fstar = f;
  Field lam = final_condition(f, fstar);
  for (double v : lam.data) CHECK(v == 0.0);

  for (auto& x : fstar.component(0)) x += 0.5;
  lam = final_condition(f, fstar);
  for (double v : lam.data) CHECK(v == Catch::Approx(1.0));

  Field f2 = constant_field(g, 0.0), fs2 = constant_field(g, 0.0);
  fs2.component(0)[4] = 0.25;
  lam = final_condition(f2, fs2);
  for (int k = 0; k < 10; ++k) CHECK(lam.component(0)[size_t(k)] == (k == 4 ? 0.5 : 0.0));
}

TEST_CASE("adjoint_rhs: zero coefficients freeze lambda") {
  Grid g = line_grid(20, 1.0, Boundary::ZeroPad);
  TermLibrary lib = build_library(1, 1, {{1}, {2}}, {{1}, {2}});
  Field lam = constant_field(g, 2.0);
  Field f = constant_field(g, 1.5);
  Field out = adjoint_rhs(lam, f, lib, CoefficientVector(lib.size(), 0.0));
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("adjoint_rhs: heat term gives d(lambda)/dt = -lambda_xx") {
  Grid g = line_grid(256, 1.0, Boundary::Periodic);
  TermLibrary lib = build_library(1, 1, {{2}}, {{1}});
  CoefficientVector alpha(std::vector<double>{-1.0});
  Field lam(g, 1);
  for (int k = 0; k < g.dims[0]; ++k)
    lam.component(0)[size_t(k)] = std::sin(2.0 * M_PI * g.coordinate(0, k));
  Field f = constant_field(g, 0.7);
  Field out = adjoint_rhs(lam, f, lib, alpha);

  auto lxx = apply_derivative(lam.component(0), g, std::vector<int>{2});
  for (size_t k = 0; k < lxx.size(); ++k)
    CHECK(out.component(0)[k] == Catch::Approx(-lxx[k]).margin(1e-12));
  const double w2 = 4.0 * M_PI * M_PI;
  for (int k = 0; k < g.dims[0]; ++k)
    CHECK(out.component(0)[size_t(k)] ==
          Catch::Approx(w2 * std::sin(2.0 * M_PI * g.coordinate(0, k))).margin(0.05));
}

TEST_CASE("adjoint_rhs: Burgers term on constant f gives 2c lambda_x") {
  Grid g = line_grid(128, 1.0, Boundary::Periodic);
  TermLibrary lib = build_library(1, 1, {{1}}, {{2}});
  CoefficientVector alpha(std::vector<double>{-1.0});
  const double c = 0.8;
  Field f = constant_field(g, c);
  Field lam(g, 1);
  for (int k = 0; k < g.dims[0]; ++k)
    lam.component(0)[size_t(k)] = std::sin(2.0 * M_PI * g.coordinate(0, k));
  Field out = adjoint_rhs(lam, f, lib, alpha);
  auto lx = apply_derivative(lam.component(0), g, std::vector<int>{1});
  for (size_t k = 0; k < lx.size(); ++k)
    CHECK(out.component(0)[k] == Catch::Approx(2.0 * c * lx[k]).margin(1e-12));
}

TEST_CASE("solve_adjoint_interval: zero model keeps lambda at the final condition") {
  Grid g = line_grid(30, 1.0, Boundary::ZeroPad);
  TermLibrary lib = build_library(1, 1, {{1}, {2}}, {{1}, {2}});
  CoefficientVector alpha(lib.size(), 0.0);
  Field f0(g, 1);
  for (int k = 0; k < 30; ++k) f0.component(0)[size_t(k)] = std::sin(0.3 * k);
  Hyperparameters hp;
  hp.substeps = 5;
  SolveTrace tr = solve_interval(f0, 0.0, 0.1, lib, alpha, hp);
  Field fstar = f0;
  for (auto& x : fstar.component(0)) x += 0.01;
  AdjointTrace adj = solve_adjoint_interval(tr, fstar, lib, alpha, hp);
  REQUIRE(adj.lambdas.size() == tr.fields.size());
  const Field& lam_end = adj.lambdas.back();
  // interior nodes stay at the final condition; boundary nodes are clamped
  for (int s = 0; s < 5; ++s)
    for (int k = 1; k < 29; ++k)
      CHECK(adj.lambdas[size_t(s)].component(0)[size_t(k)] ==
            lam_end.component(0)[size_t(k)]);
  for (int s = 0; s < 5; ++s) {
    CHECK(adj.lambdas[size_t(s)].component(0)[0] == 0.0);
    CHECK(adj.lambdas[size_t(s)].component(0)[29] == 0.0);
  }
}

TEST_CASE("solve_adjoint_interval: zero mismatch gives identically zero lambda") {
  Grid g = line_grid(40, 1.0, Boundary::ZeroPad);
  TermLibrary lib = build_library(1, 1, {{2}}, {{1}});
  CoefficientVector alpha(std::vector<double>{-1.0});
  Field f0(g, 1);
  for (int k = 0; k < 40; ++k) {
    const double x = g.coordinate(0, k);
    f0.component(0)[size_t(k)] = 5.0 * std::sin(2.0 * M_PI * x) * x * (x - 1.0);
  }
  Hyperparameters hp;
  hp.substeps = 3;
  SolveTrace tr = solve_interval(f0, 0.0, 1e-4, lib, alpha, hp);
  AdjointTrace adj = solve_adjoint_interval(tr, tr.fields.back(), lib, alpha, hp);
  for (const Field& lam : adj.lambdas)
    for (double v : lam.data) CHECK(v == 0.0);
}

TEST_CASE("solve_adjoint_interval: heat trajectory matches a straight-line backward oracle") {
  const int nx = 50;
  Grid g = line_grid(nx, 1.0, Boundary::ZeroPad);
  const double dx = g.spacing[0];
  TermLibrary lib = build_library(1, 1, {{2}}, {{1}});
  CoefficientVector alpha(std::vector<double>{-0.8});

  Field f0(g, 1);
  for (int k = 0; k < nx; ++k) {
    const double x = g.coordinate(0, k);
    f0.component(0)[size_t(k)] = 5.0 * std::sin(2.0 * M_PI * x) * x * (x - 1.0);
  }
  Hyperparameters hp;
  hp.substeps = 6;
  const double t1 = 6 * 0.05 * dx * dx;
  SolveTrace tr = solve_interval(f0, 0.0, t1, lib, alpha, hp);
  REQUIRE_FALSE(tr.blown_up);
  Field fstar = f0;  // arbitrary mismatch at the interval end
  AdjointTrace adj = solve_adjoint_interval(tr, fstar, lib, alpha, hp);

  // oracle: lambda_M = 2 (f* - f_M); lambda_k = lambda_{k+1} - dt * (-alpha) lambda_xx,
  // where the RHS uses lambda at k+1 and ZeroPad stencils; clamp boundary each step
  std::vector<double> lam(static_cast<size_t>(nx));
  for (int k = 0; k < nx; ++k)
    lam[size_t(k)] = 2.0 * (fstar.component(0)[size_t(k)] - tr.fields.back().component(0)[size_t(k)]);
  for (size_t kk = 0; kk < lam.size(); ++kk)
    CHECK(adj.lambdas.back().component(0)[kk] == lam[kk]);
  for (int s = 5; s >= 0; --s) {
    std::vector<double> next(static_cast<size_t>(nx));
    for (int k = 0; k < nx; ++k) {
      const double left = k > 0 ? lam[size_t(k) - 1] : 0.0;
      const double right = k + 1 < nx ? lam[size_t(k) + 1] : 0.0;
      const double lxx = (left - 2.0 * lam[size_t(k)] + right) / (dx * dx);
      // adjoint rhs for the heat term: (+1) * alpha * 1 * lambda_xx
      next[size_t(k)] = lam[size_t(k)] - tr.dt_internal * (alpha[0] * lxx);
    }
    next[0] = 0.0;
    next[size_t(nx) - 1] = 0.0;
    lam = next;
    auto got = adj.lambdas[size_t(s)].component(0);
    for (size_t kk = 0; kk < lam.size(); ++kk) CHECK(got[kk] == lam[kk]);
  }
}

TEST_CASE("gradient_interval: zero lambda leaves only the ridge term") {
  Grid g = line_grid(25, 1.0, Boundary::ZeroPad);
  TermLibrary lib = build_library(1, 1, {{1}, {2}}, {{1}});
  CoefficientVector alpha(std::vector<double>{1.0, -0.25});
  Field f0(g, 1);
  for (int k = 0; k < 25; ++k) f0.component(0)[size_t(k)] = 0.1 * k;
  Hyperparameters hp;
  hp.substeps = 2;
  SolveTrace tr = solve_interval(f0, 0.0, 1e-5, lib, CoefficientVector(lib.size(), 0.0), hp);
  AdjointTrace adj;
  adj.lambdas.assign(tr.fields.size(), Field(g, 1));  // identically zero

  CoefficientVector g0 = gradient_interval(tr, adj, lib, alpha, 0.0);
  for (size_t t = 0; t < g0.size(); ++t) CHECK(g0[t] == 0.0);

  CoefficientVector g1 = gradient_interval(tr, adj, lib, alpha, 1e-12);
  CHECK(g1[0] == Catch::Approx(2e-12));
  CHECK(g1[1] == Catch::Approx(-0.5e-12));

  adj.lambdas.pop_back();
  CHECK_THROWS_AS(gradient_interval(tr, adj, lib, alpha, 0.0), std::invalid_argument);
}

TEST_CASE("gradient_interval: agrees with central finite differences of the cost") {
  ProblemSpec spec;
  spec.name = Problem::Heat1D;
  spec.nx = 32;
  spec.nt = 4;
  GeneratedData gen = generate(spec);

  Hyperparameters hp;
  hp.substeps = 2;

  // evaluation point away from both zero and the truth, exercising the
  // nonlinear terms
  CoefficientVector alpha(gen.library.size(), 0.0);
  alpha[*gen.library.find(TermKey{0, {2}, {1}})] = -0.5;
  alpha[*gen.library.find(TermKey{0, {1}, {2}})] = 0.05;
  alpha[*gen.library.find(TermKey{0, {3}, {1}})] = -0.01;

  CoefficientVector adj_grad = adjoint_gradient(gen.data, gen.library, alpha, hp, 0.0);

  const double delta = 1e-6;
  double worst = 0.0;
  for (size_t t = 0; t < alpha.size(); ++t) {
    CoefficientVector plus = alpha, minus = alpha;
    plus[t] += delta;
    minus[t] -= delta;
    const double fd =
        (cost_of(gen.data, gen.library, plus, hp, 0.0) -
         cost_of(gen.data, gen.library, minus, hp, 0.0)) /
        (2.0 * delta);
    REQUIRE(fd != 0.0);
    worst = std::max(worst, std::abs(adj_grad[t] - fd) / std::abs(fd));
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("gradient: descent step from zero moves the heat coefficient toward the truth") {
  ProblemSpec spec;
  spec.name = Problem::Heat1D;
  spec.nx = 64;
  spec.nt = 8;
  GeneratedData gen = generate(spec);  // truth alpha_{d=2,p=1} = -1

  Hyperparameters hp;
  hp.substeps = 1;
  CoefficientVector alpha(gen.library.size(), 0.0);
  CoefficientVector grad = adjoint_gradient(gen.data, gen.library, alpha, hp, 0.0);

  const size_t heat_slot = *gen.library.find(TermKey{0, {2}, {1}});
  CHECK(grad[heat_slot] > 0.0);  // descent drives alpha negative, toward -1

  hp.beta = 1e-3;
  CoefficientVector stepped = update_step(alpha, grad, hp, gen.data.grid, gen.library,
                                          std::vector<bool>(gen.library.size(), false));
  CHECK(std::abs(stepped[heat_slot] - (-1.0)) < 1.0);
  CHECK(stepped[heat_slot] < 0.0);
}
