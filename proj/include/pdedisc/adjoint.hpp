#pragma once

// Backward-in-time adjoint solve per data interval and assembly of the
// analytic cost gradient from the stored forward/backward trajectories.

#include <map>

#include "pdedisc/core.hpp"
#include "pdedisc/fdkernel.hpp"
#include "pdedisc/forward.hpp"

namespace pdedisc {

struct AdjointTrace {
  std::vector<Field> lambdas;  // forward-ordered, aligned with SolveTrace.fields
  bool blown_up = false;
};

// Final condition lambda(., t_{j+1}) = 2 (f* - f).
inline Field final_condition(const Field& f_end, const Field& fstar_end) {
  if (!(f_end.grid == fstar_end.grid) || f_end.n_components != fstar_end.n_components)
    throw std::invalid_argument("final_condition: field shape mismatch");
  Field lam(f_end.grid, f_end.n_components);
  for (size_t k = 0; k < lam.data.size(); ++k)
    lam.data[k] = 2.0 * (fstar_end.data[k] - f_end.data[k]);
  return lam;
}

// Per component i: sum over the i-th equation's terms of
//   (-1)^|d| * alpha * d(f^p)/df_i * D^(d)[lambda_i].
inline Field adjoint_rhs(const Field& lambda, const Field& f, const TermLibrary& lib,
                         const CoefficientVector& alpha) {
  if (alpha.size() != lib.size())
    throw std::invalid_argument("adjoint_rhs: alpha/library size mismatch");
  Field out(lambda.grid, lambda.n_components);
  // derivative-of-lambda cache, keyed by (component, deriv)
  std::map<std::pair<int, std::vector<int>>, std::vector<double>> dlam;
  std::map<std::pair<int, std::vector<int>>, std::vector<double>> pderiv;
  for (size_t t = 0; t < lib.size(); ++t) {
    const double a = alpha[t];
    if (a == 0.0) continue;
    const TermKey& key = lib.terms[t];
    const int i = key.eq_index;
    auto dl = dlam.find({i, key.deriv});
    if (dl == dlam.end())
      dl = dlam.emplace(std::make_pair(i, key.deriv),
                        apply_derivative(lambda.component(i), lambda.grid, key.deriv))
               .first;
    auto pd = pderiv.find({i, key.power});
    if (pd == pderiv.end())
      pd = pderiv.emplace(std::make_pair(i, key.power), power_derivative(f, key.power, i)).first;
    const double sign = (key.deriv_order() % 2 == 0) ? 1.0 : -1.0;
    auto dst = out.component(i);
    const auto& dv = dl->second;
    const auto& pv = pd->second;
    for (size_t k = 0; k < dst.size(); ++k) dst[k] += sign * a * pv[k] * dv[k];
  }
  return out;
}

namespace detail {

// Compact support of lambda: zero every node on the domain boundary.
inline void clamp_boundary(Field& f) {
  const Grid& g = f.grid;
  const auto str = strides(g);
  const size_t nodes = g.node_count();
  for (int c = 0; c < f.n_components; ++c) {
    auto v = f.component(c);
    for (int axis = 0; axis < g.dim(); ++axis) {
      const size_t sa = str[axis];
      const size_t len = size_t(g.dims[axis]);
      const size_t block = sa * len;
      for (size_t hi = 0; hi < nodes; hi += block)
        for (size_t lo = 0; lo < sa; ++lo) {
          v[hi + lo] = 0.0;
          v[hi + lo + (len - 1) * sa] = 0.0;
        }
    }
  }
}

}  // namespace detail

// Backward Euler sweep of the adjoint equation against the frozen forward
// trajectory; lambda and f are taken at the same substep when evaluating the
// right-hand side. Under ZeroPad the boundary nodes are re-zeroed after
// every step.
inline AdjointTrace solve_adjoint_interval(const SolveTrace& fwd, const Field& fstar_end,
                                           const TermLibrary& lib, const CoefficientVector& alpha,
                                           const Hyperparameters& hp) {
  (void)hp;
  if (fwd.blown_up)
    throw std::invalid_argument("solve_adjoint_interval: forward trace blown up");
  const int M = fwd.substeps();
  AdjointTrace adj;
  adj.lambdas.assign(size_t(M) + 1, Field{});
  adj.lambdas[size_t(M)] = final_condition(fwd.fields[size_t(M)], fstar_end);

  const bool clamp = (fwd.fields.front().grid.boundary == Boundary::ZeroPad);
  const double ref = adj.lambdas[size_t(M)].max_abs();
  for (int k = M - 1; k >= 0; --k) {
    const Field& lam_next = adj.lambdas[size_t(k) + 1];
    const Field& f_next = fwd.fields[size_t(k) + 1];
    Field dldt = adjoint_rhs(lam_next, f_next, lib, alpha);
    Field lam(lam_next.grid, lam_next.n_components);
    for (size_t j = 0; j < lam.data.size(); ++j)
      lam.data[j] = lam_next.data[j] - fwd.dt_internal * dldt.data[j];
    if (clamp) detail::clamp_boundary(lam);
    if (exceeds_blowup(lam, ref)) {
      adj.blown_up = true;
      return adj;
    }
    adj.lambdas[size_t(k)] = std::move(lam);
  }
  return adj;
}

// Space-time rectangle-rule quadrature of (-1)^|d| f^p D^(d)[lambda_i] plus
// the ridge contribution 2*eps0*alpha.
inline CoefficientVector gradient_interval(const SolveTrace& fwd, const AdjointTrace& adj,
                                           const TermLibrary& lib, const CoefficientVector& alpha,
                                           double eps0) {
  if (adj.lambdas.size() != fwd.fields.size())
    throw std::invalid_argument("gradient_interval: misaligned traces");
  if (alpha.size() != lib.size())
    throw std::invalid_argument("gradient_interval: alpha/library size mismatch");
  const int M = fwd.substeps();
  const Grid& grid = fwd.fields.front().grid;
  const double w = fwd.dt_internal * grid.cell_volume();

  CoefficientVector g(lib.size(), 0.0);
  for (int k = 1; k <= M; ++k) {
    const Field& f = fwd.fields[size_t(k)];
    const Field& lam = adj.lambdas[size_t(k)];
    detail::MonomialCache monomials(f);
    std::map<std::pair<int, std::vector<int>>, std::vector<double>> dlam;
    for (size_t t = 0; t < lib.size(); ++t) {
      const TermKey& key = lib.terms[t];
      auto dl = dlam.find({key.eq_index, key.deriv});
      if (dl == dlam.end())
        dl = dlam.emplace(std::make_pair(key.eq_index, key.deriv),
                          apply_derivative(lam.component(key.eq_index), grid, key.deriv))
                 .first;
      const auto& m = monomials.get(key.power);
      const auto& dv = dl->second;
      double acc = 0.0;
      for (size_t j = 0; j < m.size(); ++j) acc += m[j] * dv[j];
      const double sign = (key.deriv_order() % 2 == 0) ? 1.0 : -1.0;
      g[t] += sign * acc * w;
    }
  }
  for (size_t t = 0; t < lib.size(); ++t) g[t] += 2.0 * eps0 * alpha[t];
  return g;
}

}  // namespace pdedisc
