#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fcix/common.hpp"
#include "fcix/entropy.hpp"
#include "fcix/errors.hpp"

namespace fcix::fracts {

/// Binomial-expansion coefficients pi_n(u) = u(u+1)...(u+n-1)/n! via the
/// stable recursion pi_n = pi_{n-1} (u + n - 1) / n; pi_0 = 1.
inline std::vector<double> frac_diff_coefficients(double u, int count) {
  std::vector<double> pi(static_cast<std::size_t>(count));
  if (count <= 0) return pi;
  pi[0] = 1.0;
  for (int n = 1; n < count; ++n)
    pi[n] = pi[n - 1] * (u + static_cast<double>(n) - 1.0) / static_cast<double>(n);
  return pi;
}

/// Fractional difference with expanding-window truncation at the series
/// start: (Delta^d x)_t = sum_{n=0}^{t} pi_n(-d) x_{t-n}.
inline std::vector<double> frac_diff(std::span<const double> x, double d) {
  const int n = static_cast<int>(x.size());
  const auto pi = frac_diff_coefficients(-d, n);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int t = 0; t < n; ++t) {
    double acc = 0.0;
    for (int j = 0; j <= t; ++j) acc += pi[j] * x[t - j];
    out[t] = acc;
  }
  return out;
}

namespace detail {

/// Periodogram ordinates I(lambda_j) = |sum_t x_t e^{-i lambda_j t}|^2 / (2 pi T)
/// at the first `count` Fourier frequencies lambda_j = 2 pi j / T.
inline std::vector<double> periodogram_ordinates(std::span<const double> x, int count) {
  const int n = static_cast<int>(x.size());
  std::vector<double> ords(static_cast<std::size_t>(count), 0.0);
  parallel_for(count, [&](std::int64_t idx) {
    const int j = static_cast<int>(idx) + 1;
    const double lambda = 2.0 * std::numbers::pi * j / n;
    // Recurrence-free evaluation keeps accuracy at high frequencies.
    double re = 0.0, im = 0.0;
    for (int t = 0; t < n; ++t) {
      const double phase = lambda * t;
      re += x[t] * std::cos(phase);
      im -= x[t] * std::sin(phase);
    }
    ords[static_cast<std::size_t>(idx)] =
        (re * re + im * im) / (2.0 * std::numbers::pi * n);
  });
  return ords;
}

/// Golden-section minimization of a unimodal function on [lo, hi].
template <typename Fn>
double golden_section(Fn&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  if (!std::isfinite(fc) || !std::isfinite(fd))
    throw OptimizationFailure("objective not finite on the search interval");
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    if (!std::isfinite(fc) || !std::isfinite(fd))
      throw OptimizationFailure("objective not finite during search");
  }
  return 0.5 * (a + b);
}

}  // namespace detail

struct WhittleOptions {
  int bandwidth_m = 0;  // 0: use floor(T^bandwidth_exponent)
  double bandwidth_exponent = 0.65;
  double lower = -0.5;
  double upper = 0.75;
  double tol = 1e-6;
  double diff_threshold = 0.65;  // first-stage estimate above this: difference
};

struct WhittleEstimate {
  double d_hat = 0.0;
  int bandwidth_m = 0;
  double objective = 0.0;
  bool differenced = false;
};

namespace detail {

struct WhittleStage {
  double d = 0.0;
  double objective = 0.0;
  int m = 0;
};

inline WhittleStage whittle_stage(std::span<const double> x, const WhittleOptions& opts) {
  const int n = static_cast<int>(x.size());
  int m = opts.bandwidth_m > 0
              ? opts.bandwidth_m
              : static_cast<int>(std::floor(std::pow(double(n), opts.bandwidth_exponent)));
  m = std::min(m, n / 2);
  if (m < 2) throw SeriesTooShort("too few periodogram ordinates");
  const auto ords = periodogram_ordinates(x, m);
  std::vector<double> log_lambda(static_cast<std::size_t>(m));
  for (int j = 1; j <= m; ++j)
    log_lambda[j - 1] = std::log(2.0 * std::numbers::pi * j / n);
  double mean_log_lambda = 0.0;
  for (double v : log_lambda) mean_log_lambda += v;
  mean_log_lambda /= m;

  // R(d) = log( (1/m) sum lambda_j^{2d} I_j ) - 2 d mean(log lambda_j),
  // evaluated from the one periodogram computed above.
  auto objective = [&](double d) {
    double g = 0.0;
    for (int j = 0; j < m; ++j)
      g += std::exp(2.0 * d * log_lambda[j]) * ords[static_cast<std::size_t>(j)];
    g /= m;
    return std::log(g) - 2.0 * d * mean_log_lambda;
  };

  WhittleStage stage;
  stage.m = m;
  stage.d = golden_section(objective, opts.lower, opts.upper, opts.tol);
  stage.objective = objective(stage.d);
  return stage;
}

}  // namespace detail

/// Semiparametric estimate of the fractional integration order d from the
/// low-frequency periodogram. Two-step extension: a first-stage estimate
/// above the threshold first-differences the series, re-estimates, and adds
/// one back.
inline WhittleEstimate local_whittle(std::span<const double> x,
                                     const WhittleOptions& opts = {}) {
  if (x.size() < 128) throw SeriesTooShort("local Whittle needs T >= 128");
  const auto first = detail::whittle_stage(x, opts);
  WhittleEstimate est;
  if (first.d <= opts.diff_threshold) {
    est.d_hat = first.d;
    est.bandwidth_m = first.m;
    est.objective = first.objective;
    return est;
  }
  std::vector<double> diff(x.size() - 1);
  for (std::size_t t = 1; t < x.size(); ++t) diff[t - 1] = x[t] - x[t - 1];
  const auto second = detail::whittle_stage(diff, opts);
  est.d_hat = 1.0 + second.d;
  est.bandwidth_m = second.m;
  est.objective = second.objective;
  est.differenced = true;
  return est;
}

/// Biased-normalized sample autocorrelation for lags 0..max_lag.
inline std::vector<double> acf(std::span<const double> x, int max_lag) {
  const int n = static_cast<int>(x.size());
  if (max_lag >= n) throw InvalidParameter("max_lag must be below series length");
  const double m = mean(x);
  double denom = 0.0;
  for (double v : x) denom += (v - m) * (v - m);
  std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1, 1.0);
  if (denom == 0.0) return rho;
  for (int k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (int t = k; t < n; ++t) num += (x[t] - m) * (x[t - k] - m);
    rho[static_cast<std::size_t>(k)] = num / denom;
  }
  return rho;
}

struct Periodogram {
  std::vector<double> frequencies;  // lambda_j = 2 pi j / T, j = 1..floor(T/2)
  std::vector<double> ordinates;
};

inline Periodogram periodogram(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw SeriesTooShort("periodogram needs at least 2 points");
  const int count = n / 2;
  Periodogram p;
  p.ordinates = detail::periodogram_ordinates(x, count);
  p.frequencies.resize(static_cast<std::size_t>(count));
  for (int j = 1; j <= count; ++j)
    p.frequencies[j - 1] = 2.0 * std::numbers::pi * j / n;
  return p;
}

/// Normalized sample cross-correlation; entry p + max_lag holds
/// corr(a_t, b_{t+p}) for p = -max_lag..max_lag.
inline std::vector<double> xcf(std::span<const double> a, std::span<const double> b,
                               int max_lag) {
  if (a.size() != b.size()) throw LengthMismatch("xcf needs equal-length series");
  const int n = static_cast<int>(a.size());
  if (max_lag >= n) throw InvalidParameter("max_lag must be below series length");
  const double ma = mean(a), mb = mean(b);
  double va = 0.0, vb = 0.0;
  for (int t = 0; t < n; ++t) {
    va += (a[t] - ma) * (a[t] - ma);
    vb += (b[t] - mb) * (b[t] - mb);
  }
  const double denom = std::sqrt(va * vb);
  std::vector<double> out(2 * static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int p = -max_lag; p <= max_lag; ++p) {
    double num = 0.0;
    for (int t = std::max(0, -p); t < n - std::max(0, p); ++t)
      num += (a[t] - ma) * (b[t + p] - mb);
    out[static_cast<std::size_t>(p + max_lag)] = denom > 0.0 ? num / denom : 0.0;
  }
  return out;
}

/// Least-squares vector autoregression of order p with intercept, residual
/// covariance and its lower-triangular Cholesky factor.
struct VarModel {
  int order = 0;
  std::vector<Eigen::MatrixXd> coeffs;  // A_1..A_p, each k x k
  Eigen::VectorXd intercept;
  Eigen::MatrixXd sigma;  // residual covariance
  Eigen::MatrixXd chol;   // lower triangular, chol * chol^T = sigma
  bool stable = false;
  double companion_radius = 0.0;

  int dim() const { return static_cast<int>(intercept.size()); }
};

inline VarModel var_fit(const Eigen::MatrixXd& x, int p) {
  const int t_total = static_cast<int>(x.rows());
  const int k = static_cast<int>(x.cols());
  if (p < 1) throw InvalidParameter("order must be >= 1");
  if (t_total <= k * p + 1)
    throw SeriesTooShort("need more rows than k*p + 1 for the fit");
  const int rows = t_total - p;
  const int cols = k * p + 1;
  Eigen::MatrixXd design(rows, cols);
  Eigen::MatrixXd response(rows, k);
  for (int t = p; t < t_total; ++t) {
    const int r = t - p;
    design(r, 0) = 1.0;
    for (int lag = 1; lag <= p; ++lag)
      design.block(r, 1 + (lag - 1) * k, 1, k) = x.row(t - lag);
    response.row(r) = x.row(t);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) throw SingularDesign("regressor matrix is rank deficient");
  const Eigen::MatrixXd beta = qr.solve(response);  // cols x k

  VarModel model;
  model.order = p;
  model.intercept = beta.row(0).transpose();
  for (int lag = 1; lag <= p; ++lag)
    model.coeffs.push_back(beta.block(1 + (lag - 1) * k, 0, k, k).transpose());
  const Eigen::MatrixXd resid = response - design * beta;
  model.sigma = (resid.transpose() * resid) / static_cast<double>(rows);

  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma);
  if (llt.info() != Eigen::Success)
    throw SingularDesign("residual covariance is not positive definite");
  model.chol = llt.matrixL();

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k * p, k * p);
  for (int lag = 1; lag <= p; ++lag)
    companion.block(0, (lag - 1) * k, k, k) = model.coeffs[lag - 1];
  if (p > 1)
    companion.block(k, 0, k * (p - 1), k * (p - 1)) =
        Eigen::MatrixXd::Identity(k * (p - 1), k * (p - 1));
  model.companion_radius = companion.eigenvalues().cwiseAbs().maxCoeff();
  model.stable = model.companion_radius < 1.0;
  return model;
}

/// Orthogonalized impulse responses Theta_h = Phi_h * P with the
/// moving-average recursion Phi_0 = I, Phi_h = sum A_i Phi_{h-i}; entry
/// (i, j) of responses[h] is the response of variable i at horizon h to a
/// one-standard-deviation shock in variable j.
struct IrfTable {
  std::vector<Eigen::MatrixXd> responses;  // horizons 0..H
  Eigen::MatrixXd apen_per_path;           // response variable x shocked variable
};

inline IrfTable orth_irf(const VarModel& model, int horizon) {
  if (horizon < 0) throw InvalidParameter("horizon must be >= 0");
  const int k = model.dim();
  std::vector<Eigen::MatrixXd> phi;
  phi.push_back(Eigen::MatrixXd::Identity(k, k));
  for (int h = 1; h <= horizon; ++h) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i <= std::min(h, model.order); ++i)
      m += model.coeffs[static_cast<std::size_t>(i - 1)] * phi[static_cast<std::size_t>(h - i)];
    phi.push_back(std::move(m));
  }
  IrfTable table;
  table.responses.reserve(phi.size());
  for (const auto& m : phi) table.responses.push_back(m * model.chol);
  table.apen_per_path = Eigen::MatrixXd::Zero(k, k);
  if (horizon + 1 >= 4) {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        std::vector<double> path(static_cast<std::size_t>(horizon) + 1);
        for (int h = 0; h <= horizon; ++h)
          path[static_cast<std::size_t>(h)] = table.responses[static_cast<std::size_t>(h)](i, j);
        const double sd = sample_sd(path);
        table.apen_per_path(i, j) = sd > 0.0 ? entropy::apen(path, 2, 0.2 * sd) : 0.0;
      }
  }
  return table;
}

/// Equilibrium series e_t = beta^T X_t + rho for a two-variable system.
inline std::vector<double> long_run_equilibrium(const Eigen::MatrixXd& x,
                                                const Eigen::Vector2d& beta,
                                                double rho) {
  if (x.cols() != 2) throw InvalidParameter("equilibrium expects two columns");
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index t = 0; t < x.rows(); ++t)
    out[static_cast<std::size_t>(t)] = beta(0) * x(t, 0) + beta(1) * x(t, 1) + rho;
  return out;
}

}  // namespace fcix::fracts
