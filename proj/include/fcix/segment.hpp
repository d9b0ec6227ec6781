#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fcix/common.hpp"
#include "fcix/errors.hpp"

namespace fcix::segment {

struct BandwidthResult {
  double gamma = 1.0;
  bool degenerate = false;  // all values equal; fell back to 1.0
};

/// gamma = 1 / median of pairwise squared distances, deterministically
/// subsampled to at most 10^6 pairs.
inline BandwidthResult median_bandwidth(std::span<const double> series) {
  const std::int64_t n = static_cast<std::int64_t>(series.size());
  if (n < 2) throw SeriesTooShort("bandwidth needs at least 2 points");
  const std::int64_t all_pairs = n * (n - 1) / 2;
  constexpr std::int64_t kMaxPairs = 1'000'000;
  std::vector<double> dists;
  if (all_pairs <= kMaxPairs) {
    dists.reserve(static_cast<std::size_t>(all_pairs));
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = i + 1; j < n; ++j) {
        const double d = series[i] - series[j];
        dists.push_back(d * d);
      }
  } else {
    dists.reserve(kMaxPairs);
    SplitMix64 rng(0x9a77a1d5ULL);
    for (std::int64_t k = 0; k < kMaxPairs; ++k) {
      const auto i = rng.below(static_cast<std::uint64_t>(n));
      auto j = rng.below(static_cast<std::uint64_t>(n - 1));
      if (j >= i) ++j;
      const double d = series[i] - series[j];
      dists.push_back(d * d);
    }
  }
  const double med = median_inplace(dists);
  if (med <= 0.0) return {1.0, true};
  return {1.0 / med, false};
}

/// Gaussian-kernel scatter cost over all (a, b) prefixes of one series.
/// Precomputes double prefix sums of the Gram matrix so that any
/// segment-pair sum is an O(1) query; every caller evaluates costs through
/// the same formula, which keeps dynamic-programming reconstruction exact.
class KernelCost {
 public:
  KernelCost(std::span<const double> series, double gamma)
      : n_(static_cast<int>(series.size())), gamma_(gamma) {
    if (n_ == 0) throw SeriesTooShort("empty series");
    if (n_ > 8192)
      throw InvalidParameter("kernel segmentation is quadratic in length; "
                             "aggregate series beyond 8192 points");
    if (!(gamma > 0.0)) throw InvalidParameter("bandwidth must be positive");
    const std::size_t width = static_cast<std::size_t>(n_) + 1;
    v_.assign(width * width, 0.0);
    std::vector<double> row(width, 0.0);
    for (int s = 0; s < n_; ++s) {
      row[0] = 0.0;
      for (int u = 0; u < n_; ++u) {
        const double d = series[s] - series[u];
        row[u + 1] = row[u] + std::exp(-gamma_ * d * d);
      }
      const double* prev = &v_[static_cast<std::size_t>(s) * width];
      double* next = &v_[static_cast<std::size_t>(s + 1) * width];
      for (std::size_t b = 0; b < width; ++b) next[b] = prev[b] + row[b];
    }
  }

  int size() const { return n_; }
  double gamma() const { return gamma_; }

  /// Sum of kernel values over ordered point pairs of [a, b).
  double pair_sum(int a, int b) const {
    const std::size_t width = static_cast<std::size_t>(n_) + 1;
    const double* va = &v_[static_cast<std::size_t>(a) * width];
    const double* vb = &v_[static_cast<std::size_t>(b) * width];
    return (vb[b] - va[b]) - (vb[a] - va[a]);
  }

  /// Scatter cost of segment [a, b): (b - a) - pair_sum / (b - a).
  double cost(int a, int b) const {
    if (a >= b) throw EmptySegment("segment start must precede end");
    if (a < 0 || b > n_) throw InvalidParameter("segment out of range");
    const double len = static_cast<double>(b - a);
    return len - pair_sum(a, b) / len;
  }

 private:
  int n_;
  double gamma_;
  std::vector<double> v_;  // (n+1) x (n+1) double prefix sums of the Gram
};

/// Standalone segment cost over points a..b-1 (direct double loop).
inline double segment_cost(std::span<const double> series, int a, int b,
                           double gamma) {
  if (a >= b) throw EmptySegment("segment start must precede end");
  if (a < 0 || b > static_cast<int>(series.size()))
    throw InvalidParameter("segment out of range");
  double gram = 0.0;
  for (int s = a; s < b; ++s)
    for (int t = a; t < b; ++t) {
      const double d = series[s] - series[t];
      gram += std::exp(-gamma * d * d);
    }
  const double len = static_cast<double>(b - a);
  return len - gram / len;
}

struct SegmentationResult {
  std::vector<int> changepoints;       // strictly increasing, within (0, T)
  std::vector<double> segment_costs;   // K* + 1 values
  double total_cost = 0.0;
  double bandwidth = 0.0;
};

struct SegmentOptions {
  int min_len = 2;
};

/// Globally optimal placement of k_star change points by dynamic
/// programming over suffix costs; ties resolve to the lexicographically
/// smallest changepoint vector.
inline SegmentationResult detect_changepoints(std::span<const double> series,
                                              int k_star, double gamma,
                                              const SegmentOptions& opts = {}) {
  const int n = static_cast<int>(series.size());
  if (k_star < 1) throw InvalidParameter("k_star must be >= 1");
  if (opts.min_len < 1) throw InvalidParameter("min segment length must be >= 1");
  const int min_len = opts.min_len;
  if (n < (k_star + 1) * min_len)
    throw InfeasiblePartition("cannot place " + std::to_string(k_star) +
                              " change points with segments of length >= " +
                              std::to_string(min_len) + " in " +
                              std::to_string(n) + " points");

  const KernelCost kernel(series, gamma);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // suffix[k][a]: optimal cost of splitting [a, n) into k + 1 segments.
  std::vector<std::vector<double>> suffix(
      static_cast<std::size_t>(k_star) + 1,
      std::vector<double>(static_cast<std::size_t>(n) + 1, kInf));
  for (int a = 0; a + min_len <= n; ++a) suffix[0][a] = kernel.cost(a, n);
  for (int k = 1; k <= k_star; ++k) {
    for (int a = 0; a + (k + 1) * min_len <= n; ++a) {
      double best = kInf;
      const int b_max = n - k * min_len;
      for (int b = a + min_len; b <= b_max; ++b) {
        const double candidate = kernel.cost(a, b) + suffix[k - 1][b];
        if (candidate < best) best = candidate;
      }
      suffix[k][a] = best;
    }
  }

  SegmentationResult result;
  result.bandwidth = gamma;
  result.total_cost = suffix[k_star][0];
  int a = 0;
  for (int k = k_star; k >= 1; --k) {
    const int b_max = n - k * min_len;
    int chosen = -1;
    for (int b = a + min_len; b <= b_max; ++b) {
      // Candidates re-evaluate bitwise-identically to the fill above, so
      // exact equality finds the smallest optimal index.
      if (kernel.cost(a, b) + suffix[k - 1][b] == suffix[k][a]) {
        chosen = b;
        break;
      }
    }
    if (chosen < 0) throw NumericError("segmentation backtrack failed");
    result.changepoints.push_back(chosen);
    result.segment_costs.push_back(kernel.cost(a, chosen));
    a = chosen;
  }
  result.segment_costs.push_back(kernel.cost(a, n));
  return result;
}

/// Fixed-K solutions for K = 1..k_max; the cost-vs-K curve is the caller's
/// elbow diagnostic for choosing K.
inline std::vector<SegmentationResult> elbow_report(std::span<const double> series,
                                                    int k_max, double gamma,
                                                    const SegmentOptions& opts = {}) {
  if (k_max < 1) throw InvalidParameter("k_max must be >= 1");
  std::vector<SegmentationResult> out;
  for (int k = 1; k <= k_max; ++k)
    out.push_back(detect_changepoints(series, k, gamma, opts));
  return out;
}

}  // namespace fcix::segment
