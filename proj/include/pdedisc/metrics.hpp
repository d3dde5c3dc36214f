#pragma once

// Recovery-quality metrics: support recovery (TPR), field residuals and
// the incomplete-library stagnation diagnostic.

#include "pdedisc/core.hpp"
#include "pdedisc/forward.hpp"

namespace pdedisc {

// TPR = TP / (TP + FN + FP) over the supports of est and truth, where a
// slot counts as nonzero when |value| > zero_tol. Returns 1 when all three
// counts are zero (empty true PDE matched by an empty estimate).
inline double tpr(const CoefficientVector& est, const CoefficientVector& truth, double zero_tol) {
  if (est.size() != truth.size()) throw std::invalid_argument("tpr: length mismatch");
  if (zero_tol < 0) throw std::invalid_argument("tpr: zero_tol must be >= 0");
  int tp = 0, fn = 0, fp = 0;
  for (size_t i = 0; i < est.size(); ++i) {
    const bool e = std::abs(est[i]) > zero_tol;
    const bool t = std::abs(truth[i]) > zero_tol;
    if (e && t) ++tp;
    else if (!e && t) ++fn;
    else if (e && !t) ++fp;
  }
  if (tp + fn + fp == 0) return 1.0;
  return double(tp) / double(tp + fn + fp);
}

struct ResidualResult {
  double value = 0.0;
  bool blown = false;
};

// Relative L2 mismatch between per-interval forward solves (started from the
// data) and the data itself: sqrt(sum_j |f(t_{j+1}) - f*|^2) / sqrt(sum |f*|^2).
inline ResidualResult l2_residual(const Dataset& data, const TermLibrary& lib,
                                  const CoefficientVector& alpha, const Hyperparameters& hp) {
  if (data.n_snapshots() < 2) throw std::invalid_argument("l2_residual: need >= 2 snapshots");
  double num = 0.0, den = 0.0;
  for (size_t j = 0; j + 1 < data.n_snapshots(); ++j) {
    SolveTrace trace =
        solve_interval(data.snapshots[j], data.times[j], data.times[j + 1], lib, alpha, hp);
    if (trace.blown_up)
      return {std::numeric_limits<double>::infinity(), true};
    const Field& f_end = trace.fields.back();
    const Field& fstar = data.snapshots[j + 1];
    for (size_t k = 0; k < f_end.data.size(); ++k) {
      const double d = f_end.data[k] - fstar.data[k];
      num += d * d;
      den += fstar.data[k] * fstar.data[k];
    }
  }
  return {den > 0.0 ? std::sqrt(num / den) : std::sqrt(num), false};
}

// True when the residual trajectory improved by less than `factor` over the
// trailing `window` epochs while staying above `floor`.
inline bool stagnation_flag(const std::vector<double>& per_epoch_residuals, int window = 50,
                            double factor = 0.99, double floor = 1e-8) {
  if (int(per_epoch_residuals.size()) < window)
    throw std::invalid_argument("stagnation_flag: need at least `window` epochs");
  const double last = per_epoch_residuals.back();
  const double start = per_epoch_residuals[per_epoch_residuals.size() - size_t(window)];
  if (!(last > floor)) return false;
  return last >= factor * start;
}

}  // namespace pdedisc
