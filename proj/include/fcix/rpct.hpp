#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcix/common.hpp"
#include "fcix/entropy.hpp"
#include "fcix/errors.hpp"
#include "fcix/panel.hpp"
#include "fcix/rpcm.hpp"

namespace fcix::rpct {

/// Third-order tensor whose frontal slices are reciprocal comparison
/// matrices, one per time step of a lag-l return panel.
struct ComparisonTensor {
  int n = 0;        // assets
  int horizon = 0;  // time steps T
  int lag = 1;
  std::vector<std::string> dates;
  std::vector<Eigen::MatrixXd> slices;  // T frontal N x N slices

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& m : slices) s += m.squaredNorm();
    return std::sqrt(s);
  }
};

/// Slice t has entries a_ij = r_i / r_j from returns row t, the unique
/// reciprocal consistent rank-1 construction from a positive return vector.
inline ComparisonTensor build_rpct(const panel::ReturnsPanel& returns) {
  ComparisonTensor tensor;
  tensor.n = returns.assets();
  tensor.horizon = returns.steps();
  tensor.lag = returns.lag;
  tensor.dates = returns.dates;
  tensor.slices.reserve(tensor.horizon);
  for (int t = 0; t < tensor.horizon; ++t) {
    const Eigen::VectorXd r = returns.returns.row(t).transpose();
    tensor.slices.push_back(
        rpcm::ComparisonMatrix::from_weights(r).entries());
  }
  return tensor;
}

struct DecomposeOptions {
  double tol = 1e-10;  // relative factor-change stop
  int max_iters = 500;
  std::uint64_t seed = 0;  // perturbs the start only to escape degeneracy
};

/// Rank-1 factors of the consensus tensor: spatial x, y (strictly positive,
/// unit norm) and temporal z >= 0 carrying all magnitude.
struct Rank1Factors {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  double rel_error = 0.0;  // ||A - Ahat||_F / ||A||_F
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // squared error after each sweep
};

/// Alternating least squares for min ||A - z o (x y^T)||_F with x, y > 0 and
/// z >= 0. Updates for a strictly positive tensor are sums of positive
/// products, so positivity of x and y is preserved automatically.
inline Rank1Factors consensus_decompose(const ComparisonTensor& tensor,
                                        const DecomposeOptions& opts = {}) {
  const int n = tensor.n;
  const int horizon = tensor.horizon;
  if (n == 0 || horizon == 0) throw InvalidParameter("empty tensor");

  const double norm_a = tensor.frobenius_norm();
  const double norm_a_sq = norm_a * norm_a;

  Rank1Factors f;
  f.x = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  f.y = f.x;
  f.z.resize(horizon);
  for (int t = 0; t < horizon; ++t) f.z(t) = tensor.slices[t].mean();

  auto update_z = [&] {
    for (int t = 0; t < horizon; ++t)
      f.z(t) = std::max(0.0, f.x.dot(tensor.slices[t] * f.y));
  };
  // Squared objective for unit x, y and optimal z: ||A||^2 - sum z_t^2.
  auto objective = [&] { return norm_a_sq - f.z.squaredNorm(); };

  SplitMix64 rng(opts.seed ^ 0x5ca1ab1eULL);
  double prev_objective = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iters; ++it) {
    const Eigen::VectorXd x_old = f.x;
    const Eigen::VectorXd y_old = f.y;
    const Eigen::VectorXd z_old = f.z;

    update_z();
    Eigen::VectorXd xt = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < horizon; ++t) xt += f.z(t) * (tensor.slices[t] * f.y);
    double xt_norm = xt.norm();
    if (xt_norm < 1e-300) {
      // Degenerate direction; nudge deterministically and retry once.
      for (int i = 0; i < n; ++i) xt(i) = 1.0 + 0.01 * rng.uniform();
      xt_norm = xt.norm();
      if (xt_norm < 1e-300) throw DegenerateFactor("spatial factor collapsed");
    }
    f.x = xt / xt_norm;

    Eigen::VectorXd yt = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < horizon; ++t)
      yt += f.z(t) * (tensor.slices[t].transpose() * f.x);
    const double yt_norm = yt.norm();
    if (yt_norm < 1e-300) throw DegenerateFactor("spatial factor collapsed");
    f.y = yt / yt_norm;

    update_z();
    const double obj = objective();
    f.objective_history.push_back(obj);
    // The objective is a difference of two O(||A||^2) sums, so its noise
    // floor scales with ||A||^2 rather than with the objective itself.
    if (obj > prev_objective + 1e-12 * norm_a_sq)
      throw NumericError("ALS objective increased between sweeps");
    prev_objective = obj;
    f.iterations = it;

    const double dx = (f.x - x_old).norm();
    const double dy = (f.y - y_old).norm();
    const double dz = (f.z - z_old).norm() / std::max(1e-300, f.z.norm());
    if (dx <= opts.tol && dy <= opts.tol && dz <= opts.tol) {
      f.converged = true;
      break;
    }
  }

  double err_sq = 0.0;
  for (int t = 0; t < horizon; ++t)
    err_sq += (tensor.slices[t] - f.z(t) * (f.x * f.y.transpose())).squaredNorm();
  f.rel_error = std::sqrt(err_sq) / norm_a;
  return f;
}

enum class Aggregation { daily, monthly, quarterly };

inline std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::daily: return "daily";
    case Aggregation::monthly: return "monthly";
    default: return "quarterly";
  }
}

/// Chaos-index series psi(t) = (lambda_max(t) - N) / (N - 1). Values are
/// kept raw; negatives_clamped counts entries below zero, which the
/// published output clamps.
struct FcixSeries {
  std::vector<std::string> dates;
  Eigen::VectorXd psi;
  Aggregation aggregation = Aggregation::daily;
  int negatives_clamped = 0;

  int size() const { return static_cast<int>(psi.size()); }
  std::vector<double> values() const {
    return std::vector<double>(psi.data(), psi.data() + psi.size());
  }
  std::vector<double> clamped_values() const {
    std::vector<double> out(psi.size());
    for (int t = 0; t < size(); ++t) out[t] = std::max(0.0, psi(t));
    return out;
  }
};

/// The reconstructed slice z_t (x y^T) is rank-1, so its only nonzero
/// eigenvalue is z_t (y^T x), evaluated analytically. With cross_check set,
/// up to 64 evenly spaced reconstructed slices are re-solved by power
/// iteration and must agree within 1e-10.
inline FcixSeries fcix_series(const Rank1Factors& factors, int n,
                              const std::vector<std::string>& dates,
                              bool cross_check = false) {
  if (n < 2) throw DegenerateOrder("index needs order >= 2");
  if (static_cast<int>(dates.size()) != factors.z.size())
    throw LengthMismatch("dates and temporal factor differ in length");
  FcixSeries series;
  series.dates = dates;
  series.psi.resize(factors.z.size());
  const double xy = factors.y.dot(factors.x);
  for (int t = 0; t < factors.z.size(); ++t) {
    const double lambda = factors.z(t) * xy;
    series.psi(t) = rpcm::inconsistency(lambda, n);
    if (series.psi(t) < 0.0) ++series.negatives_clamped;
  }
  if (cross_check) {
    const int horizon = static_cast<int>(factors.z.size());
    const int stride = std::max(1, horizon / 64);
    for (int t = 0; t < horizon; t += stride) {
      if (!(factors.z(t) > 0.0)) continue;
      const Eigen::MatrixXd slice = factors.z(t) * (factors.x * factors.y.transpose());
      const double iterated =
          rpcm::perron_eigenvalue(rpcm::ComparisonMatrix(slice)).lambda_max;
      if (std::abs(factors.z(t) * xy - iterated) > 1e-10)
        throw NumericError("analytic slice eigenvalue disagrees with power iteration");
    }
  }
  return series;
}

namespace detail {

inline std::string period_label(const std::string& date, Aggregation period) {
  if (date.size() < 7 || date[4] != '-')
    throw ParseError("date '" + date + "' is not ISO-8601");
  if (period == Aggregation::monthly) return date.substr(0, 7);
  const int month = std::stoi(date.substr(5, 2));
  if (month < 1 || month > 12) throw ParseError("bad month in date " + date);
  return date.substr(0, 4) + "-Q" + std::to_string((month - 1) / 3 + 1);
}

}  // namespace detail

/// Arithmetic mean of the daily index over each calendar period.
inline FcixSeries aggregate(const FcixSeries& series, Aggregation period) {
  if (series.aggregation != Aggregation::daily)
    throw InvalidParameter("aggregate expects a daily series");
  if (period == Aggregation::daily) return series;
  FcixSeries out;
  out.aggregation = period;
  std::string current;
  double sum = 0.0;
  int count = 0;
  auto flush = [&] {
    if (count == 0) return;
    out.dates.push_back(current);
    const double value = sum / count;
    out.psi.conservativeResize(out.psi.size() + 1);
    out.psi(out.psi.size() - 1) = value;
    if (value < 0.0) ++out.negatives_clamped;
  };
  for (int t = 0; t < series.size(); ++t) {
    const std::string label = detail::period_label(series.dates[t], period);
    if (label != current) {
      flush();
      current = label;
      sum = 0.0;
      count = 0;
    }
    sum += series.psi(t);
    ++count;
  }
  flush();
  return out;
}

/// Approximate entropy of the index with tolerance r = r_frac * sd(psi).
/// A constant series has zero regularity by convention.
inline double regularity(const FcixSeries& series, int m = 2, double r_frac = 0.2) {
  if (series.size() < m + 2)
    throw SeriesTooShort("regularity needs at least m + 2 points");
  const auto values = series.values();
  const double sd = sample_sd(values);
  if (sd == 0.0) return 0.0;
  return entropy::apen(values, m, r_frac * sd);
}

/// Finite-sample statistics behind the four high-volatility regime
/// properties: eigenvalue sensitivity, triple consistency, slice-to-slice
/// discrepancy, and entry homogeneity.
struct RegimeDiagnostics {
  std::optional<double> sensitivity_stat;  // ||adj(N I - A)||_2 / N^(N-1)
  std::string sensitivity_note;
  double consistency_stat = 0.0;  // cDeg in [0, 1]
  double discrepancy_stat = 0.0;  // normalized Frobenius distance in [0, 1]
  double homogeneity_stat = 0.0;  // fraction of entries outside [1/K, K]
};

inline RegimeDiagnostics regime_diagnostics(const ComparisonTensor& tensor,
                                            int t, double k_threshold) {
  if (t < 0 || t + 1 >= tensor.horizon)
    throw IndexOutOfRange("regime diagnostics need slices t and t+1");
  if (!(k_threshold > 1.0))
    throw InvalidParameter("homogeneity threshold K must exceed 1");
  RegimeDiagnostics d;
  const Eigen::MatrixXd& a = tensor.slices[t];
  const Eigen::MatrixXd& b = tensor.slices[t + 1];
  const int n = tensor.n;

  rpcm::ComparisonMatrix slice(a);
  if (n <= 10) {
    const Eigen::MatrixXd shifted =
        double(n) * Eigen::MatrixXd::Identity(n, n) - a;
    const Eigen::MatrixXd adj = rpcm::detail::adjugate(shifted);
    const double spectral =
        Eigen::JacobiSVD<Eigen::MatrixXd>(adj).singularValues()(0);
    d.sensitivity_stat = spectral / std::pow(double(n), n - 1);
  } else {
    d.sensitivity_note = "omitted: adjugate-based statistic capped at order 10";
  }
  d.consistency_stat = rpcm::consistency_degree(slice);
  d.discrepancy_stat = (a - b).norm() / std::max(a.norm(), b.norm());
  int outside = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a(i, j) > k_threshold || a(i, j) < 1.0 / k_threshold) ++outside;
  d.homogeneity_stat = static_cast<double>(outside) / (double(n) * n);
  return d;
}

/// One pipeline run per lag plus least-squares fits of the growth of the
/// decomposition error (log-log) and of the mean inconsistency (linear).
struct LagScalingReport {
  struct Row {
    int lag = 0;
    double epsilon = 0.0;   // decomposition relative error
    double psi_bar = 0.0;   // mean raw index value
    double regularity = 0.0;
    int iterations = 0;
  };
  std::vector<Row> rows;
  bool has_fits = false;
  bool epsilon_degenerate = false;  // some epsilon ~ 0, log fit undefined
  double epsilon_log_slope = 0.0;
  double epsilon_log_intercept = 0.0;
  double epsilon_fit_rss = 0.0;
  double psi_slope = 0.0;
  double psi_intercept = 0.0;
  double psi_fit_rss = 0.0;
};

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, rss = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  const double denom = n * sxx - sx * sx;
  f.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  f.intercept = (sy - f.slope * sx) / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.rss += r * r;
  }
  return f;
}

}  // namespace detail

inline LagScalingReport lag_scaling_report(const panel::PricePanel& panel,
                                           const std::vector<int>& lags,
                                           const DecomposeOptions& opts = {},
                                           int apen_m = 2, double apen_r_frac = 0.2) {
  if (lags.empty()) throw InvalidParameter("no lags requested");
  LagScalingReport report;
  report.rows.resize(lags.size());
  // Per-lag runs are independent pipeline executions.
  parallel_for(static_cast<std::int64_t>(lags.size()), [&](std::int64_t i) {
    const int lag = lags[static_cast<std::size_t>(i)];
    const auto returns = panel::lag_returns(panel, lag);
    const auto tensor = build_rpct(returns);
    const auto factors = consensus_decompose(tensor, opts);
    const auto series = fcix_series(factors, tensor.n, tensor.dates);
    LagScalingReport::Row row;
    row.lag = lag;
    row.epsilon = factors.rel_error;
    row.psi_bar = series.psi.mean();
    row.regularity =
        series.size() >= apen_m + 2 ? regularity(series, apen_m, apen_r_frac) : 0.0;
    row.iterations = factors.iterations;
    report.rows[static_cast<std::size_t>(i)] = row;
  });

  if (report.rows.size() >= 2) {
    report.has_fits = true;
    std::vector<double> log_l, log_eps, lag_vals, psi_vals;
    for (const auto& row : report.rows) {
      lag_vals.push_back(row.lag);
      psi_vals.push_back(row.psi_bar);
      if (row.epsilon <= 1e-14) {
        report.epsilon_degenerate = true;
      } else {
        log_l.push_back(std::log(double(row.lag)));
        log_eps.push_back(std::log(row.epsilon));
      }
    }
    if (!report.epsilon_degenerate && log_l.size() >= 2) {
      const auto f = detail::fit_line(log_l, log_eps);
      report.epsilon_log_slope = f.slope;
      report.epsilon_log_intercept = f.intercept;
      report.epsilon_fit_rss = f.rss;
    }
    const auto g = detail::fit_line(lag_vals, psi_vals);
    report.psi_slope = g.slope;
    report.psi_intercept = g.intercept;
    report.psi_fit_rss = g.rss;
  }
  return report;
}

}  // namespace fcix::rpct
