#pragma once

// Explicit-Euler forward solve of the guessed model over one data interval,
// with internal substepping and a stability cap on the step size.

#include <cfloat>
#include <cmath>
#include <map>
#include <optional>

#include "pdedisc/core.hpp"
#include "pdedisc/fdkernel.hpp"

namespace pdedisc {

struct SolveTrace {
  std::vector<Field> fields;  // substeps+1 entries when not blown up
  double dt_internal = 0.0;
  bool blown_up = false;
  std::optional<int> blowup_step;

  int substeps() const { return int(fields.size()) - 1; }
};

namespace detail {

// Monomial cache shared by the terms of one right-hand-side evaluation.
class MonomialCache {
 public:
  explicit MonomialCache(const Field& f) : field_(f) {}

  const std::vector<double>& get(const std::vector<int>& p) {
    auto it = cache_.find(p);
    if (it == cache_.end())
      it = cache_.emplace(p, monomial_field(field_, p)).first;
    return it->second;
  }

 private:
  const Field& field_;
  std::map<std::vector<int>, std::vector<double>> cache_;
};

}  // namespace detail

// Time derivative implied by the forward model: per component i,
//   df_i/dt = -sum over that equation's terms of alpha * D^(d)[f^p].
inline Field rhs(const Field& f, const TermLibrary& lib, const CoefficientVector& alpha) {
  if (alpha.size() != lib.size()) throw std::invalid_argument("rhs: alpha/library size mismatch");
  Field out(f.grid, f.n_components);
  detail::MonomialCache monomials(f);
  for (size_t t = 0; t < lib.size(); ++t) {
    const double a = alpha[t];
    if (a == 0.0) continue;
    const TermKey& key = lib.terms[t];
    const auto& m = monomials.get(key.power);
    std::vector<double> dv = apply_derivative(m, f.grid, key.deriv);
    auto dst = out.component(key.eq_index);
    for (size_t k = 0; k < dv.size(); ++k) dst[k] -= a * dv[k];
  }
  return out;
}

// Stability cap: dt <= cfl_safety * min over active terms of dx_min^|d| / |alpha|.
inline double stability_dt(const Grid& grid, const TermLibrary& lib,
                           const CoefficientVector& alpha, double cfl_safety) {
  const double h = grid.min_spacing();
  double dt = std::numeric_limits<double>::infinity();
  for (size_t t = 0; t < lib.size(); ++t) {
    const double a = std::max(std::abs(alpha[t]), DBL_EPSILON);
    const double bound = cfl_safety * detail::ipow(h, lib.terms[t].deriv_order()) / a;
    dt = std::min(dt, bound);
  }
  return dt;
}

inline bool exceeds_blowup(const Field& f, double reference_max_abs) {
  const double limit = 1e6 * (1.0 + reference_max_abs);
  for (double x : f.data)
    if (!std::isfinite(x) || std::abs(x) > limit) return true;
  return false;
}

// Forward Euler over (t0, t1] recording the trajectory at every substep.
// The requested substep count is raised when the stability cap demands it.
inline SolveTrace solve_interval(const Field& f0, double t0, double t1,
                                 const TermLibrary& lib, const CoefficientVector& alpha,
                                 const Hyperparameters& hp) {
  if (!(t1 > t0)) throw std::invalid_argument("solve_interval: t1 must exceed t0");
  const double len = t1 - t0;
  int steps = hp.substeps;
  const double dt_stab = stability_dt(f0.grid, lib, alpha, hp.cfl_safety);
  if (len / steps > dt_stab) {
    // small slack so an interval exactly at the cap keeps its step count
    steps = std::max(steps, int(std::ceil(len / dt_stab - 1e-9)));
  }
  SolveTrace trace;
  trace.dt_internal = len / steps;
  trace.fields.reserve(size_t(steps) + 1);
  trace.fields.push_back(f0);

  const double ref = f0.max_abs();
  for (int s = 0; s < steps; ++s) {
    const Field& cur = trace.fields.back();
    Field dfdt = rhs(cur, lib, alpha);
    Field next(cur.grid, cur.n_components);
    for (size_t k = 0; k < next.data.size(); ++k)
      next.data[k] = cur.data[k] + trace.dt_internal * dfdt.data[k];
    if (exceeds_blowup(next, ref)) {
      trace.blown_up = true;
      trace.blowup_step = s;
      return trace;
    }
    trace.fields.push_back(std::move(next));
  }
  return trace;
}

}  // namespace pdedisc
