#pragma once

// Dictionary-regression baseline: finite-difference dictionary of candidate
// terms plus sequential-thresholded ridge regression (STRidge), sharing the
// derivative kernels with the adjoint path so both methods see identical
// term values.

#include <Eigen/Dense>

#include "pdedisc/core.hpp"
#include "pdedisc/fdkernel.hpp"

namespace pdedisc {

struct RegressionProblem {
  Eigen::MatrixXd theta;            // [samples x terms] of D^(d)[f^p]
  Eigen::VectorXd target;           // FD-estimated df_i/dt
  std::vector<TermKey> term_keys;   // column order
  int eq_index = 0;
  size_t dropped_rows = 0;          // margin-excluded or non-finite samples
};

namespace detail {

// Nodes away from ZeroPad boundaries by at least the widest stencil radius
// used on that axis; periodic axes need no margin.
inline std::vector<char> interior_mask(const Grid& g, const TermLibrary& lib) {
  std::vector<int> margin(size_t(g.dim()), 0);
  if (g.boundary == Boundary::ZeroPad) {
    for (const auto& t : lib.terms)
      for (int a = 0; a < g.dim(); ++a)
        margin[size_t(a)] = std::max(margin[size_t(a)], central_stencil(t.deriv[size_t(a)]).radius());
  }
  std::vector<char> mask(g.node_count(), 1);
  for_each_node(g, [&](size_t k, const std::vector<int>& idx) {
    for (int a = 0; a < g.dim(); ++a) {
      if (idx[size_t(a)] < margin[size_t(a)] || idx[size_t(a)] >= g.dims[size_t(a)] - margin[size_t(a)])
        mask[k] = 0;
    }
  });
  return mask;
}

}  // namespace detail

// One regression problem per equation: rows are (snapshot, interior node)
// samples, columns the equation's terms evaluated by the shared FD kernels,
// target the centered (one-sided at the ends) time derivative.
inline std::vector<RegressionProblem> build_dictionary(const Dataset& data,
                                                       const TermLibrary& lib) {
  const size_t T = data.n_snapshots();
  if (T < 3) throw data_error("build_dictionary: need at least 3 snapshots");
  if (lib.spatial_dim != data.grid.dim() || lib.n_equations != data.n_components())
    throw std::invalid_argument("build_dictionary: library inconsistent with data");
  const double dt = data.times[1] - data.times[0];
  for (size_t j = 1; j + 1 < T; ++j)
    if (std::abs((data.times[j + 1] - data.times[j]) - dt) > 1e-9 * dt)
      throw data_error("build_dictionary: time grid must be uniform");

  const std::vector<char> mask = detail::interior_mask(data.grid, lib);
  std::vector<size_t> keep;
  for (size_t k = 0; k < mask.size(); ++k)
    if (mask[k]) keep.push_back(k);
  const size_t dropped_per_snap = mask.size() - keep.size();

  std::vector<RegressionProblem> problems(size_t(lib.n_equations));
  for (int eq = 0; eq < lib.n_equations; ++eq) {
    auto& p = problems[size_t(eq)];
    p.eq_index = eq;
    for (const auto& t : lib.terms)
      if (t.eq_index == eq) p.term_keys.push_back(t);
    p.theta.resize(Eigen::Index(T * keep.size()), Eigen::Index(p.term_keys.size()));
    p.target.resize(Eigen::Index(T * keep.size()));
    p.dropped_rows = T * dropped_per_snap;
  }

  for (size_t j = 0; j < T; ++j) {
    const Field& f = data.snapshots[j];
    // time derivative, second order everywhere
    for (int eq = 0; eq < lib.n_equations; ++eq) {
      auto cur = data.snapshots[j].component(eq);
      std::vector<double> ft(cur.size());
      if (j == 0) {
        auto f1 = data.snapshots[1].component(eq);
        auto f2 = data.snapshots[2].component(eq);
        for (size_t k = 0; k < ft.size(); ++k)
          ft[k] = (-3.0 * cur[k] + 4.0 * f1[k] - f2[k]) / (2.0 * dt);
      } else if (j + 1 == T) {
        auto f1 = data.snapshots[T - 2].component(eq);
        auto f2 = data.snapshots[T - 3].component(eq);
        for (size_t k = 0; k < ft.size(); ++k)
          ft[k] = (3.0 * cur[k] - 4.0 * f1[k] + f2[k]) / (2.0 * dt);
      } else {
        auto fm = data.snapshots[j - 1].component(eq);
        auto fp = data.snapshots[j + 1].component(eq);
        for (size_t k = 0; k < ft.size(); ++k) ft[k] = (fp[k] - fm[k]) / (2.0 * dt);
      }
      auto& p = problems[size_t(eq)];
      const Eigen::Index row0 = Eigen::Index(j * keep.size());
      for (size_t r = 0; r < keep.size(); ++r) p.target(row0 + Eigen::Index(r)) = ft[keep[r]];
    }
    // dictionary columns
    for (int eq = 0; eq < lib.n_equations; ++eq) {
      auto& p = problems[size_t(eq)];
      const Eigen::Index row0 = Eigen::Index(j * keep.size());
      for (size_t c = 0; c < p.term_keys.size(); ++c) {
        const TermKey& key = p.term_keys[c];
        std::vector<double> m = monomial_field(f, key.power);
        std::vector<double> dv = apply_derivative(m, f.grid, key.deriv);
        for (size_t r = 0; r < keep.size(); ++r)
          p.theta(row0 + Eigen::Index(r), Eigen::Index(c)) = dv[keep[r]];
      }
    }
  }

  // drop any row with a non-finite entry
  for (auto& p : problems) {
    std::vector<Eigen::Index> good;
    for (Eigen::Index r = 0; r < p.theta.rows(); ++r) {
      bool ok = std::isfinite(p.target(r));
      for (Eigen::Index c = 0; ok && c < p.theta.cols(); ++c) ok = std::isfinite(p.theta(r, c));
      if (ok) good.push_back(r);
    }
    if (Eigen::Index(good.size()) != p.theta.rows()) {
      p.dropped_rows += size_t(p.theta.rows()) - good.size();
      Eigen::MatrixXd th(Eigen::Index(good.size()), p.theta.cols());
      Eigen::VectorXd tg(Eigen::Index(good.size()));
      for (size_t r = 0; r < good.size(); ++r) {
        th.row(Eigen::Index(r)) = p.theta.row(good[r]);
        tg(Eigen::Index(r)) = p.target(good[r]);
      }
      p.theta = std::move(th);
      p.target = std::move(tg);
    }
  }
  return problems;
}

struct StridgeResult {
  CoefficientVector alpha;  // over the problem's term_keys
  int iterations = 0;
  bool rank_deficient = false;
};

// Sequential-thresholded ridge on the sign convention df/dt = -Theta alpha:
// ridge solves with max-abs column normalization, hard truncation at `tol`,
// and an unregularized refit on the survivors once anything was truncated.
inline StridgeResult stridge(const RegressionProblem& problem, double ridge_lambda = 1e-5,
                             double tol = 1e-3, int max_iters = 25) {
  if (tol < 0) throw std::invalid_argument("stridge: tol must be >= 0");
  const Eigen::Index n = problem.theta.cols();
  StridgeResult res;
  res.alpha = CoefficientVector(size_t(n), 0.0);
  if (problem.theta.rows() == 0) return res;

  Eigen::VectorXd scale(n);
  std::vector<char> active(size_t(n), 1);
  for (Eigen::Index c = 0; c < n; ++c) {
    scale(c) = problem.theta.col(c).cwiseAbs().maxCoeff();
    if (scale(c) == 0.0) active[size_t(c)] = 0;  // dead column
  }
  const Eigen::VectorXd rhs_full = -problem.target;

  auto solve_ridge = [&](const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd a(problem.theta.rows(), Eigen::Index(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c)
      a.col(Eigen::Index(c)) = problem.theta.col(cols[c]) / scale(cols[c]);
    Eigen::MatrixXd gram = a.transpose() * a;
    gram.diagonal().array() += ridge_lambda;
    Eigen::VectorXd beta = gram.ldlt().solve(a.transpose() * rhs_full);
    Eigen::VectorXd phys(cols.size());
    for (size_t c = 0; c < cols.size(); ++c) phys(Eigen::Index(c)) = beta(Eigen::Index(c)) / scale(cols[c]);
    return phys;
  };

  bool truncated = false;
  Eigen::VectorXd last;
  std::vector<Eigen::Index> cols;
  for (int it = 0; it < max_iters; ++it) {
    res.iterations = it + 1;
    cols.clear();
    for (Eigen::Index c = 0; c < n; ++c)
      if (active[size_t(c)]) cols.push_back(c);
    if (cols.empty()) return res;
    last = solve_ridge(cols);
    bool changed = false;
    for (size_t c = 0; c < cols.size(); ++c) {
      if (std::abs(last(Eigen::Index(c))) < tol) {
        active[size_t(cols[c])] = 0;
        changed = true;
        truncated = true;
      }
    }
    if (!changed) break;
  }

  cols.clear();
  for (Eigen::Index c = 0; c < n; ++c)
    if (active[size_t(c)]) cols.push_back(c);
  if (cols.empty()) return res;

  if (truncated) {
    Eigen::MatrixXd a(problem.theta.rows(), Eigen::Index(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) a.col(Eigen::Index(c)) = problem.theta.col(cols[c]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < Eigen::Index(cols.size())) res.rank_deficient = true;
    Eigen::VectorXd refit = qr.solve(rhs_full);
    for (size_t c = 0; c < cols.size(); ++c) res.alpha[size_t(cols[c])] = refit(Eigen::Index(c));
  } else {
    for (size_t c = 0; c < cols.size(); ++c) res.alpha[size_t(cols[c])] = last(Eigen::Index(c));
  }
  return res;
}

// Convenience: run stridge per equation and scatter into a full-library vector.
inline CoefficientVector stridge_full(const Dataset& data, const TermLibrary& lib,
                                      double ridge_lambda = 1e-5, double tol = 1e-3,
                                      int max_iters = 25, int* iterations = nullptr) {
  CoefficientVector alpha(lib.size(), 0.0);
  int iters = 0;
  for (auto& problem : build_dictionary(data, lib)) {
    StridgeResult r = stridge(problem, ridge_lambda, tol, max_iters);
    iters = std::max(iters, r.iterations);
    for (size_t c = 0; c < problem.term_keys.size(); ++c) {
      auto slot = lib.find(problem.term_keys[c]);
      alpha[*slot] = r.alpha[c];
    }
  }
  if (iterations) *iterations = iters;
  return alpha;
}

}  // namespace pdedisc
