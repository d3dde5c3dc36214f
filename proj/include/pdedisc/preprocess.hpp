#pragma once

// Dataset preprocessing: multiplicative noise injection, SVD truncation
// denoising, and temporal subsampling for partial-observation studies.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "pdedisc/core.hpp"
#include "pdedisc/rng.hpp"

namespace pdedisc {

// f <- f * (1 + e) with e ~ N(0, sigma^2) per node, snapshot and component.
inline Dataset add_noise(const Dataset& data, double sigma_noise, std::uint64_t seed) {
  if (sigma_noise < 0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (sigma_noise == 0.0) return data;
  Dataset out = data;
  SplitMix64 rng = SplitMix64::stream(seed, 0);
  for (auto& snap : out.snapshots)
    for (double& x : snap.data) x *= 1.0 + sigma_noise * rng.next_normal();
  return out;
}

// Per-component truncated-SVD reconstruction of the [time x space] matrix.
// With relative=true a triplet is kept when sv >= threshold * sv_max.
inline Dataset svd_denoise(const Dataset& data, double sv_threshold, bool relative = true) {
  if (sv_threshold < 0) throw std::invalid_argument("svd_denoise: threshold must be >= 0");
  const size_t T = data.n_snapshots();
  if (T < 2) return data;
  const size_t S = data.grid.node_count();
  Dataset out = data;
  for (int c = 0; c < data.n_components(); ++c) {
    Eigen::MatrixXd m(T, S);
    for (size_t j = 0; j < T; ++j) {
      auto comp = data.snapshots[j].component(c);
      for (size_t k = 0; k < S; ++k) m(Eigen::Index(j), Eigen::Index(k)) = comp[k];
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = relative ? sv_threshold * (sv.size() ? sv(0) : 0.0) : sv_threshold;
    Eigen::Index keep = 0;
    while (keep < sv.size() && sv(keep) >= cutoff) ++keep;
    Eigen::MatrixXd rec = svd.matrixU().leftCols(keep) * sv.head(keep).asDiagonal() *
                          svd.matrixV().leftCols(keep).transpose();
    for (size_t j = 0; j < T; ++j) {
      auto comp = out.snapshots[j].component(c);
      for (size_t k = 0; k < S; ++k) comp[k] = rec(Eigen::Index(j), Eigen::Index(k));
    }
  }
  return out;
}

// Keep snapshots at indices 0, stride, 2*stride, ...
inline Dataset subsample_time(const Dataset& data, int stride) {
  if (stride < 1) throw std::invalid_argument("subsample_time: stride must be >= 1");
  if (stride == 1) return data;
  Dataset out;
  out.grid = data.grid;
  for (size_t j = 0; j < data.n_snapshots(); j += size_t(stride)) {
    out.times.push_back(data.times[j]);
    out.snapshots.push_back(data.snapshots[j]);
  }
  if (out.n_snapshots() < 2)
    throw data_error("subsample_time: fewer than 2 snapshots survive");
  return out;
}

}  // namespace pdedisc
