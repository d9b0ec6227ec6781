#pragma once

// Shared test utilities: seeded generators, independent oracles.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fcix/rpcm.hpp"
#include "fcix/segment.hpp"

namespace testutil {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Eigen::VectorXd random_positive_vector(std::mt19937_64& gen, int n,
                                              double lo = 0.25, double hi = 4.0) {
  std::uniform_real_distribution<double> dist(std::log(lo), std::log(hi));
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = std::exp(dist(gen));
  return w;
}

inline fcix::rpcm::ComparisonMatrix random_consistent(std::mt19937_64& gen, int n) {
  return fcix::rpcm::ComparisonMatrix::from_weights(random_positive_vector(gen, n));
}

/// Multiplies one off-diagonal pair (a_ij, a_ji) by (c, 1/c).
inline fcix::rpcm::ComparisonMatrix perturb_pair(
    const fcix::rpcm::ComparisonMatrix& a, std::mt19937_64& gen, double c) {
  const int n = a.order();
  Eigen::MatrixXd m = a.entries();
  std::uniform_int_distribution<int> pick(0, n - 1);
  int i = pick(gen);
  int j = pick(gen);
  while (j == i) j = pick(gen);
  m(i, j) *= c;
  m(j, i) /= c;
  return fcix::rpcm::ComparisonMatrix(std::move(m));
}

/// Dominant eigenvalue from a dense full-spectrum solve (oracle route,
/// independent of the power iteration under test).
inline double dense_perron_oracle(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    best = std::max(best, solver.eigenvalues()(i).real());
  return best;
}

inline std::vector<double> random_series(std::mt19937_64& gen, int n,
                                         double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = dist(gen);
  return out;
}

inline std::vector<double> gaussian_series(std::mt19937_64& gen, int n,
                                           double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = dist(gen);
  return out;
}

/// Cyclic de Bruijn sequence over alphabet size k, order n (every length-n
/// word appears exactly once per cycle).
inline std::vector<int> de_bruijn(int k, int n) {
  std::vector<int> a(static_cast<std::size_t>(k) * n, 0);
  std::vector<int> seq;
  auto db = [&](auto&& self, int t, int p) -> void {
    if (t > n) {
      if (n % p == 0)
        for (int i = 1; i <= p; ++i) seq.push_back(a[static_cast<std::size_t>(i)]);
    } else {
      a[static_cast<std::size_t>(t)] = a[static_cast<std::size_t>(t - p)];
      self(self, t + 1, p);
      for (int j = a[static_cast<std::size_t>(t - p)] + 1; j < k; ++j) {
        a[static_cast<std::size_t>(t)] = j;
        self(self, t + 1, t);
      }
    }
  };
  db(db, 1, 1);
  return seq;
}

/// Exhaustive-search segmentation oracle: enumerates every admissible
/// changepoint vector in lexicographic order and keeps the first strict
/// optimum. Costs go through the public segment_cost route.
struct BruteForceSegmentation {
  std::vector<int> changepoints;
  double total_cost = std::numeric_limits<double>::infinity();
};

inline void brute_force_recurse(std::span<const double> series, double gamma,
                                int min_len, int k_left, int start,
                                std::vector<int>& current, double cost_so_far,
                                BruteForceSegmentation& best) {
  const int n = static_cast<int>(series.size());
  if (k_left == 0) {
    const double total = cost_so_far + fcix::segment::segment_cost(series, start, n, gamma);
    if (total < best.total_cost) {
      best.total_cost = total;
      best.changepoints = current;
    }
    return;
  }
  // After a breakpoint at b, the remaining [b, n) must hold k_left segments.
  for (int b = start + min_len; b <= n - k_left * min_len; ++b) {
    current.push_back(b);
    brute_force_recurse(series, gamma, min_len, k_left - 1, b, current,
                        cost_so_far + fcix::segment::segment_cost(series, start, b, gamma),
                        best);
    current.pop_back();
  }
}

inline BruteForceSegmentation brute_force_segmentation(std::span<const double> series,
                                                       int k_star, double gamma,
                                                       int min_len = 2) {
  BruteForceSegmentation best;
  std::vector<int> current;
  brute_force_recurse(series, gamma, min_len, k_star, 0, current, 0.0, best);
  return best;
}

}  // namespace testutil
