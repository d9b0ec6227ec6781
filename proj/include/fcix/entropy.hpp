#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fcix/common.hpp"
#include "fcix/errors.hpp"

namespace fcix::entropy {

namespace detail {

/// Phi^m(r): mean over i of log C_i^m(r), with self-matches included so
/// every count is positive.
inline double phi(std::span<const double> u, int m, double r) {
  const int blocks = static_cast<int>(u.size()) - m + 1;
  if (blocks <= 0) throw SeriesTooShort("series shorter than block length");
  double acc = 0.0;
  for (int i = 0; i < blocks; ++i) {
    int count = 0;
    for (int j = 0; j < blocks; ++j) {
      double dist = 0.0;
      for (int k = 0; k < m; ++k)
        dist = std::max(dist, std::abs(u[i + k] - u[j + k]));
      if (dist <= r) ++count;
    }
    acc += std::log(static_cast<double>(count) / blocks);
  }
  return acc / blocks;
}

}  // namespace detail

/// Approximate entropy Phi^m(r) - Phi^(m+1)(r): the negative log
/// conditional frequency with which blocks of length m that are close
/// within r stay close for one more step.
inline double apen(std::span<const double> series, int m, double r) {
  if (!(r > 0.0)) throw NonPositiveTolerance("apen tolerance must be positive");
  if (static_cast<int>(series.size()) < m + 2)
    throw SeriesTooShort("apen needs at least m + 2 points");
  return detail::phi(series, m, r) - detail::phi(series, m + 1, r);
}

/// Plain average of the block recurrence fractions C_i^m(r), without the
/// logarithm or the (m+1)-block comparison. Reported alongside apen for
/// comparison; equals 1 on a constant series.
inline double recurrence_rate(std::span<const double> series, int m, double r) {
  if (!(r > 0.0)) throw NonPositiveTolerance("tolerance must be positive");
  const int blocks = static_cast<int>(series.size()) - m + 1;
  if (blocks <= 0) throw SeriesTooShort("series shorter than block length");
  double acc = 0.0;
  for (int i = 0; i < blocks; ++i) {
    int count = 0;
    for (int j = 0; j < blocks; ++j) {
      double dist = 0.0;
      for (int k = 0; k < m; ++k)
        dist = std::max(dist, std::abs(series[i + k] - series[j + k]));
      if (dist <= r) ++count;
    }
    acc += static_cast<double>(count) / blocks;
  }
  return acc / blocks;
}

/// Integer symbol series from equal-frequency (quantile) binning; ties are
/// split by stable rank so bin counts differ by at most one.
struct DiscretizedSeries {
  std::vector<int> symbols;
  int bins = 0;
  std::vector<double> edges;  // first value falling in each bin, by rank

  int size() const { return static_cast<int>(symbols.size()); }
};

inline DiscretizedSeries discretize(std::span<const double> series, int bins) {
  if (bins < 2) throw InvalidParameter("need at least 2 bins");
  const int n = static_cast<int>(series.size());
  if (n == 0) throw SeriesTooShort("empty series");
  {
    std::vector<double> uniq(series.begin(), series.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (static_cast<int>(uniq.size()) < bins)
      throw DegenerateSeries("fewer distinct values than bins");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return series[a] < series[b]; });
  DiscretizedSeries out;
  out.bins = bins;
  out.symbols.resize(n);
  out.edges.assign(bins, 0.0);
  int prev_sym = -1;
  for (int rank = 0; rank < n; ++rank) {
    const int sym = static_cast<int>((static_cast<std::int64_t>(rank) * bins) / n);
    out.symbols[order[rank]] = sym;
    if (sym != prev_sym) out.edges[sym] = series[order[rank]];
    prev_sym = sym;
  }
  return out;
}

namespace detail {

/// Plug-in entropy in nats from integer keys: log n - (1/n) sum c log c.
inline double entropy_of_keys(std::span<const std::uint64_t> keys) {
  if (keys.empty()) return 0.0;
  std::map<std::uint64_t, std::int64_t> counts;
  for (auto k : keys) ++counts[k];
  const double n = static_cast<double>(keys.size());
  double c_log_c = 0.0;
  for (const auto& [key, c] : counts)
    c_log_c += static_cast<double>(c) * std::log(static_cast<double>(c));
  return std::log(n) - c_log_c / n;
}

/// Composite key of k past symbols ending at t-1 (most recent first).
inline std::uint64_t past_key(const std::vector<int>& sym, int t, int k, int bins) {
  std::uint64_t key = 0;
  for (int i = 1; i <= k; ++i) key = key * bins + sym[t - i];
  return key;
}

inline void check_alphabet(int bins, int k) {
  // bins^(2k+1) composite keys must fit in 64 bits.
  double width = std::pow(static_cast<double>(bins), 2 * k + 1);
  if (width > 9e18) throw InvalidParameter("bins^(2k+1) exceeds key space");
}

}  // namespace detail

/// Plug-in Shannon entropy H(Z) in nats.
inline double shannon(const DiscretizedSeries& d) {
  std::vector<std::uint64_t> keys(d.symbols.begin(), d.symbols.end());
  return detail::entropy_of_keys(keys);
}

/// Plug-in conditional entropy H(Z | V) = H(Z, V) - H(V) over aligned pairs.
inline double conditional(const DiscretizedSeries& dz, const DiscretizedSeries& dv) {
  if (dz.size() != dv.size())
    throw LengthMismatch("conditional entropy needs aligned series");
  const int n = dz.size();
  std::vector<std::uint64_t> joint(n), marg(n);
  for (int t = 0; t < n; ++t) {
    joint[t] = static_cast<std::uint64_t>(dz.symbols[t]) * dv.bins + dv.symbols[t];
    marg[t] = static_cast<std::uint64_t>(dv.symbols[t]);
  }
  return detail::entropy_of_keys(joint) - detail::entropy_of_keys(marg);
}

/// Self-entropy S_Z = H(Z_t) - H(Z_t | k-lag past), estimated over the
/// aligned window sample t = k .. n-1.
inline double self_entropy(std::span<const double> series, int k, int bins) {
  if (k < 1) throw InvalidParameter("order k must be >= 1");
  const int n = static_cast<int>(series.size());
  if (n <= k + 1) throw SeriesTooShort("self-entropy needs length > k + 1");
  detail::check_alphabet(bins, k);
  const auto d = discretize(series, bins);
  const int windows = n - k;
  std::vector<std::uint64_t> present(windows), joint(windows), past(windows);
  for (int t = k; t < n; ++t) {
    const std::uint64_t p = detail::past_key(d.symbols, t, k, bins);
    present[t - k] = static_cast<std::uint64_t>(d.symbols[t]);
    past[t - k] = p;
    joint[t - k] = p * bins + d.symbols[t];
  }
  const double h_present = detail::entropy_of_keys(present);
  const double h_cond =
      detail::entropy_of_keys(joint) - detail::entropy_of_keys(past);
  return h_present - h_cond;
}

/// Transfer entropy T_{V -> Z} = H(Z_t | Z past) - H(Z_t | V past, Z past),
/// nonnegative for any plug-in distribution.
inline double transfer_entropy(std::span<const double> source,
                               std::span<const double> target, int k, int bins) {
  if (k < 1) throw InvalidParameter("order k must be >= 1");
  if (source.size() != target.size())
    throw LengthMismatch("transfer entropy needs equal-length series");
  const int n = static_cast<int>(target.size());
  if (n <= k + 1) throw SeriesTooShort("transfer entropy needs length > k + 1");
  detail::check_alphabet(bins, k);
  const auto dz = discretize(target, bins);
  const auto dv = discretize(source, bins);
  const int windows = n - k;
  std::vector<std::uint64_t> z_joint(windows), z_past(windows);
  std::vector<std::uint64_t> zv_joint(windows), zv_past(windows);
  const std::uint64_t k_width =
      static_cast<std::uint64_t>(std::llround(std::pow(double(bins), k)));
  for (int t = k; t < n; ++t) {
    const std::uint64_t zp = detail::past_key(dz.symbols, t, k, bins);
    const std::uint64_t vp = detail::past_key(dv.symbols, t, k, bins);
    const std::uint64_t both = zp * k_width + vp;
    z_past[t - k] = zp;
    z_joint[t - k] = zp * bins + dz.symbols[t];
    zv_past[t - k] = both;
    zv_joint[t - k] = both * bins + dz.symbols[t];
  }
  const double h_z =
      detail::entropy_of_keys(z_joint) - detail::entropy_of_keys(z_past);
  const double h_zv =
      detail::entropy_of_keys(zv_joint) - detail::entropy_of_keys(zv_past);
  return h_z - h_zv;
}

/// Surrogate p-value: the fraction of circular-shift surrogates of the
/// source whose transfer entropy reaches the observed one.
inline double shuffle_significance(std::span<const double> source,
                                   std::span<const double> target, int k,
                                   int bins, int n_shuffles, std::uint64_t seed) {
  if (n_shuffles < 99) throw InvalidParameter("need at least 99 surrogates");
  const double observed = transfer_entropy(source, target, k, bins);
  const int n = static_cast<int>(source.size());
  std::vector<std::uint64_t> shifts(n_shuffles);
  SplitMix64 rng(seed ^ 0x7e5ca7eULL);
  for (int s = 0; s < n_shuffles; ++s)
    shifts[s] = 1 + rng.below(static_cast<std::uint64_t>(n - 1));
  std::vector<int> hits(n_shuffles, 0);
  parallel_for(n_shuffles, [&](std::int64_t s) {
    std::vector<double> rotated(n);
    const int shift = static_cast<int>(shifts[static_cast<std::size_t>(s)]);
    for (int t = 0; t < n; ++t) rotated[t] = source[(t + shift) % n];
    const double te = transfer_entropy(rotated, target, k, bins);
    hits[static_cast<std::size_t>(s)] = te >= observed ? 1 : 0;
  });
  int count = 0;
  for (int h : hits) count += h;
  return static_cast<double>(count) / n_shuffles;
}

struct InformationOptions {
  int k = 1;
  int bins = 3;
  int apen_m = 2;
  double apen_r_frac = 0.2;
  int n_shuffles = 199;
  std::uint64_t seed = 20190101;
};

/// Bivariate information summary between two aligned processes.
struct InformationReport {
  std::string name_a = "a";
  std::string name_b = "b";
  double shannon_a = 0.0;
  double shannon_b = 0.0;
  double conditional_a_given_b = 0.0;
  double self_entropy_a = 0.0;
  double self_entropy_b = 0.0;
  double transfer_a_to_b = 0.0;
  double transfer_b_to_a = 0.0;
  double p_a_to_b = 1.0;
  double p_b_to_a = 1.0;
  double apen_a = 0.0;
  double apen_b = 0.0;
  std::vector<std::string> warnings;
};

inline bool sample_adequate(int length, int k, int bins) {
  return length >= k + 10 * static_cast<int>(std::pow(double(bins), k + 1));
}

inline InformationReport information_report(std::span<const double> a,
                                            std::span<const double> b,
                                            const std::string& name_a,
                                            const std::string& name_b,
                                            const InformationOptions& opts = {}) {
  if (a.size() != b.size())
    throw LengthMismatch("information report needs aligned series");
  InformationReport r;
  r.name_a = name_a;
  r.name_b = name_b;
  const auto da = discretize(a, opts.bins);
  const auto db = discretize(b, opts.bins);
  r.shannon_a = shannon(da);
  r.shannon_b = shannon(db);
  r.conditional_a_given_b = conditional(da, db);
  r.self_entropy_a = self_entropy(a, opts.k, opts.bins);
  r.self_entropy_b = self_entropy(b, opts.k, opts.bins);
  r.transfer_a_to_b = transfer_entropy(a, b, opts.k, opts.bins);
  r.transfer_b_to_a = transfer_entropy(b, a, opts.k, opts.bins);
  r.p_a_to_b = shuffle_significance(a, b, opts.k, opts.bins, opts.n_shuffles, opts.seed);
  r.p_b_to_a =
      shuffle_significance(b, a, opts.k, opts.bins, opts.n_shuffles, opts.seed + 1);
  const double sd_a = sample_sd(a);
  const double sd_b = sample_sd(b);
  r.apen_a = sd_a > 0.0 ? apen(a, opts.apen_m, opts.apen_r_frac * sd_a) : 0.0;
  r.apen_b = sd_b > 0.0 ? apen(b, opts.apen_m, opts.apen_r_frac * sd_b) : 0.0;
  if (!sample_adequate(static_cast<int>(a.size()), opts.k, opts.bins))
    r.warnings.push_back("sample is short for the joint alphabet; "
                         "entropy estimates may be biased");
  return r;
}

}  // namespace fcix::entropy
