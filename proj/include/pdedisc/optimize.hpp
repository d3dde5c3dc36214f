#pragma once

// The discovery loop: scaled gradient descent over the term coefficients
// with hard thresholding, convergence tests and divergence guards. Supports
// per-interval updates and the gradient-averaging variant.

#include <set>

#include "pdedisc/adjoint.hpp"
#include "pdedisc/core.hpp"
#include "pdedisc/forward.hpp"
#include "pdedisc/metrics.hpp"
#include "pdedisc/threading.hpp"

namespace pdedisc {

enum class DiscoveryFlag { Converged, HitMaxEpochs, IntervalBlowups, ResidualStagnation };

inline const char* to_string(DiscoveryFlag f) {
  switch (f) {
    case DiscoveryFlag::Converged: return "Converged";
    case DiscoveryFlag::HitMaxEpochs: return "HitMaxEpochs";
    case DiscoveryFlag::IntervalBlowups: return "IntervalBlowups";
    case DiscoveryFlag::ResidualStagnation: return "ResidualStagnation";
  }
  return "?";
}

struct DiscoveryReport {
  CoefficientVector final_alpha;
  std::vector<TermKey> active_terms;  // nonzero slots of final_alpha
  int epochs_run = 0;
  std::vector<std::vector<double>> per_epoch_alpha;
  std::vector<double> per_epoch_l2_residual;
  std::set<DiscoveryFlag> flags;
  int blowup_count = 0;
};

// eta = beta * min(dx)^(|d| - d_max), so that every term converges at a
// comparable rate regardless of its derivative order.
inline double learning_rate(const TermKey& term, const Hyperparameters& hp, const Grid& grid,
                            int d_max) {
  return hp.beta * detail::ipow(grid.min_spacing(), term.deriv_order() - d_max);
}

// alpha <- alpha - eta * grad, keeping slots frozen by thresholding at zero.
inline CoefficientVector update_step(const CoefficientVector& alpha, const CoefficientVector& grad,
                                     const Hyperparameters& hp, const Grid& grid,
                                     const TermLibrary& lib, const std::vector<bool>& frozen) {
  if (alpha.size() != grad.size() || alpha.size() != lib.size() || frozen.size() != lib.size())
    throw std::invalid_argument("update_step: size mismatch");
  if (!grad.finite()) throw numerical_error("update_step: non-finite gradient");
  CoefficientVector next = alpha;
  for (size_t t = 0; t < lib.size(); ++t) {
    if (frozen[t]) {
      next[t] = 0.0;
      continue;
    }
    next[t] = alpha[t] - learning_rate(lib.terms[t], hp, grid, lib.d_max) * grad[t];
  }
  return next;
}

// Zero and permanently freeze every slot with |alpha| < sigma_thr. The
// frozen set is cumulative; pass the previous set to keep earlier freezes.
inline std::pair<CoefficientVector, std::vector<bool>> apply_threshold(
    const CoefficientVector& alpha, double sigma_thr, std::vector<bool> frozen = {}) {
  if (frozen.empty()) frozen.assign(alpha.size(), false);
  if (frozen.size() != alpha.size())
    throw std::invalid_argument("apply_threshold: frozen set size mismatch");
  CoefficientVector out = alpha;
  for (size_t t = 0; t < alpha.size(); ++t) {
    if (frozen[t] || std::abs(alpha[t]) < sigma_thr) {
      out[t] = 0.0;
      frozen[t] = true;
    }
  }
  return {std::move(out), std::move(frozen)};
}

namespace detail {

struct IntervalResult {
  CoefficientVector grad;
  double mismatch_sq = 0.0;  // node-sum of (f_end - f*)^2 at the interval end
  double data_sq = 0.0;      // node-sum of f*^2 at the interval end
  bool failed = false;
};

// Forward + adjoint + gradient for one interval. On blow-up the internal
// step is halved (relative to what the last attempt actually used) up to
// three times; after that the interval contributes a zero gradient.
inline IntervalResult interval_gradient(const Dataset& data, size_t j, const TermLibrary& lib,
                                        const CoefficientVector& alpha, const Hyperparameters& hp,
                                        double eps0) {
  IntervalResult res;
  const double t0 = data.times[j];
  const double t1 = data.times[j + 1];
  int substeps = hp.substeps;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Hyperparameters local = hp;
    local.substeps = substeps;
    SolveTrace fwd = solve_interval(data.snapshots[j], t0, t1, lib, alpha, local);
    if (!fwd.blown_up) {
      AdjointTrace adj = solve_adjoint_interval(fwd, data.snapshots[j + 1], lib, alpha, local);
      if (!adj.blown_up) {
        res.grad = gradient_interval(fwd, adj, lib, alpha, eps0);
        const Field& f_end = fwd.fields.back();
        const Field& fstar = data.snapshots[j + 1];
        for (size_t k = 0; k < f_end.data.size(); ++k) {
          const double d = f_end.data[k] - fstar.data[k];
          res.mismatch_sq += d * d;
          res.data_sq += fstar.data[k] * fstar.data[k];
        }
        return res;
      }
    }
    const int used = std::max(1, int(std::lround((t1 - t0) / fwd.dt_internal)));
    substeps = std::max(substeps, used) * 2;
  }
  res.failed = true;
  res.grad = CoefficientVector(lib.size(), 0.0);
  return res;
}

}  // namespace detail

// Full discovery loop. Per interval j the forward model is solved from the
// data snapshot at t_j, the adjoint backward from the mismatch at t_{j+1},
// and the gradient updates alpha either after each interval or once per
// epoch after averaging over all intervals (hp.averaging). Thresholding
// activates once epoch > n_thr or the per-epoch max-abs change drops below
// gamma_thr, and then runs every epoch. The loop ends when the max-abs
// change drops below gamma with an unchanged frozen set after at least one
// thresholding pass, or at max_epochs.
inline DiscoveryReport discover(const Dataset& data, const TermLibrary& lib,
                                const Hyperparameters& hp,
                                const std::optional<CoefficientVector>& initial = {}) {
  hp.validate();
  if (data.n_snapshots() < 2) throw std::invalid_argument("discover: need at least 2 snapshots");
  if (lib.spatial_dim != data.grid.dim() || lib.n_equations != data.n_components())
    throw std::invalid_argument("discover: library inconsistent with data dims");

  const size_t n_terms = lib.size();
  const size_t n_intervals = data.n_snapshots() - 1;

  CoefficientVector alpha = initial ? *initial : CoefficientVector(n_terms, 0.0);
  if (alpha.size() != n_terms) throw std::invalid_argument("discover: initial alpha size mismatch");
  std::vector<bool> frozen(n_terms, false);

  DiscoveryReport report;
  bool threshold_active = false;
  bool thresholded_once = false;
  bool aborted = false;

  CoefficientVector prev = alpha;
  for (int epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    int blowups = 0;
    double mismatch_sq = 0.0;
    double data_sq = 0.0;

    if (hp.averaging) {
      const double eps_in = hp.ridge_per_interval ? hp.eps0 : 0.0;
      std::vector<detail::IntervalResult> results(n_intervals);
      parallel_for(n_intervals, hp.threads, [&](size_t j) {
        results[j] = detail::interval_gradient(data, j, lib, alpha, hp, eps_in);
      });
      CoefficientVector avg(n_terms, 0.0);
      for (const auto& r : results) {
        if (r.failed) {
          ++blowups;
          continue;
        }
        for (size_t t = 0; t < n_terms; ++t) avg[t] += r.grad[t];
        mismatch_sq += r.mismatch_sq;
        data_sq += r.data_sq;
      }
      if (blowups == int(n_intervals)) {
        report.blowup_count += blowups;
        report.flags.insert(DiscoveryFlag::IntervalBlowups);
        aborted = true;
        break;
      }
      for (size_t t = 0; t < n_terms; ++t) avg[t] /= double(n_intervals);
      if (!hp.ridge_per_interval)
        for (size_t t = 0; t < n_terms; ++t) avg[t] += 2.0 * hp.eps0 * alpha[t];
      alpha = update_step(alpha, avg, hp, data.grid, lib, frozen);
    } else {
      for (size_t j = 0; j < n_intervals; ++j) {
        detail::IntervalResult r = detail::interval_gradient(data, j, lib, alpha, hp, hp.eps0);
        if (r.failed) {
          ++blowups;
          continue;
        }
        mismatch_sq += r.mismatch_sq;
        data_sq += r.data_sq;
        alpha = update_step(alpha, r.grad, hp, data.grid, lib, frozen);
      }
      if (blowups == int(n_intervals)) {
        report.blowup_count += blowups;
        report.flags.insert(DiscoveryFlag::IntervalBlowups);
        aborted = true;
        break;
      }
    }
    report.blowup_count += blowups;
    if (blowups > 0) report.flags.insert(DiscoveryFlag::IntervalBlowups);
    if (!alpha.finite()) throw numerical_error("discover: non-finite coefficients");

    // pre-threshold change drives the thresholding trigger
    double max_change = 0.0;
    for (size_t t = 0; t < n_terms; ++t)
      max_change = std::max(max_change, std::abs(alpha[t] - prev[t]));

    bool frozen_changed = false;
    if (hp.threshold_mode == ThresholdMode::During) {
      if (epoch > hp.n_thr || max_change < hp.gamma_thr) threshold_active = true;
      if (threshold_active) {
        std::vector<bool> before = frozen;
        auto [thr_alpha, thr_frozen] = apply_threshold(alpha, hp.sigma_thr, frozen);
        alpha = std::move(thr_alpha);
        frozen = std::move(thr_frozen);
        frozen_changed = (frozen != before);
        thresholded_once = true;
      }
    }

    report.per_epoch_alpha.push_back(alpha.values);
    report.per_epoch_l2_residual.push_back(
        data_sq > 0.0 ? std::sqrt(mismatch_sq / data_sq) : std::sqrt(mismatch_sq));
    report.epochs_run = epoch;

    // post-threshold change decides final convergence
    max_change = 0.0;
    for (size_t t = 0; t < n_terms; ++t)
      max_change = std::max(max_change, std::abs(alpha[t] - prev[t]));
    prev = alpha;

    if (max_change < hp.gamma) {
      if (hp.threshold_mode == ThresholdMode::During) {
        if (!frozen_changed && thresholded_once) {
          report.flags.insert(DiscoveryFlag::Converged);
          break;
        }
      } else {
        report.flags.insert(DiscoveryFlag::Converged);
        break;
      }
    }
  }

  if (hp.threshold_mode == ThresholdMode::FinalOnly) {
    auto [thr_alpha, thr_frozen] = apply_threshold(alpha, hp.sigma_thr, frozen);
    alpha = std::move(thr_alpha);
    frozen = std::move(thr_frozen);
  }

  if (!aborted && !report.flags.count(DiscoveryFlag::Converged))
    report.flags.insert(DiscoveryFlag::HitMaxEpochs);
  if (int(report.per_epoch_l2_residual.size()) >= 50 &&
      stagnation_flag(report.per_epoch_l2_residual))
    report.flags.insert(DiscoveryFlag::ResidualStagnation);

  report.final_alpha = alpha;
  for (size_t t = 0; t < n_terms; ++t)
    if (alpha[t] != 0.0) report.active_terms.push_back(lib.terms[t]);
  return report;
}

struct ConvergenceSummary {
  std::vector<double> l1_error_per_epoch;  // empty when no truth supplied
  std::vector<double> l2_residual_per_epoch;
};

inline ConvergenceSummary convergence_metrics(const DiscoveryReport& report,
                                              const std::optional<CoefficientVector>& truth = {}) {
  ConvergenceSummary s;
  s.l2_residual_per_epoch = report.per_epoch_l2_residual;
  if (truth) {
    for (const auto& row : report.per_epoch_alpha) {
      if (row.size() != truth->size())
        throw std::invalid_argument("convergence_metrics: truth size mismatch");
      double l1 = 0.0;
      for (size_t t = 0; t < row.size(); ++t) l1 += std::abs(row[t] - truth->values[t]);
      s.l1_error_per_epoch.push_back(l1);
    }
  }
  return s;
}

}  // namespace pdedisc
