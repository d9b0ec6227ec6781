#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fcix/errors.hpp"

namespace fcix::rpcm {

/// Square matrix of strictly positive preference ratios. Positivity is
/// checked at construction; reciprocity (unit diagonal, a_ij * a_ji = 1)
/// is a property of a subfamily, queried via is_reciprocal().
class ComparisonMatrix {
 public:
  explicit ComparisonMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
      throw InvalidParameter("comparison matrix must be square");
    if (entries_.rows() == 0) throw InvalidParameter("comparison matrix is empty");
    for (Eigen::Index i = 0; i < entries_.rows(); ++i)
      for (Eigen::Index j = 0; j < entries_.cols(); ++j)
        if (!(entries_(i, j) > 0.0) || !std::isfinite(entries_(i, j)))
          throw NonPositiveEntry("entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") is not strictly positive");
  }

  /// a_ij = w_i / w_j; reciprocal and fully consistent by construction.
  static ComparisonMatrix from_weights(const Eigen::VectorXd& w) {
    if (w.size() == 0) throw NonPositiveWeight("empty weight vector");
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (!(w(i) > 0.0) || !std::isfinite(w(i)))
        throw NonPositiveWeight("weight " + std::to_string(i) +
                                " is not strictly positive");
    Eigen::MatrixXd a(w.size(), w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i)
      for (Eigen::Index j = 0; j < w.size(); ++j) a(i, j) = w(i) / w(j);
    return ComparisonMatrix(std::move(a));
  }

  int order() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const { return entries_; }

  bool is_reciprocal(double rel_tol = 1e-9) const {
    const int n = order();
    for (int i = 0; i < n; ++i) {
      if (std::abs(entries_(i, i) - 1.0) > rel_tol) return false;
      for (int j = i + 1; j < n; ++j)
        if (std::abs(entries_(i, j) * entries_(j, i) - 1.0) > rel_tol) return false;
    }
    return true;
  }

 private:
  Eigen::MatrixXd entries_;
};

struct EigenResult {
  double lambda_max = 0.0;
  Eigen::VectorXd right_vector;  // strictly positive, unit Euclidean norm
  int iterations = 0;
  double residual = 0.0;  // ||A v - lambda v||_2
};

struct PowerOptions {
  double rel_tol = 1e-12;       // relative eigenvalue-change stop
  double residual_factor = 1e-10;  // accept when residual <= factor * ||A||_F
  int max_iters = 10000;
};

/// Dominant eigenpair by power iteration. The all-ones start vector is
/// strictly positive, so iterates stay positive and converge to the
/// Perron root of a strictly positive matrix.
inline EigenResult perron_eigenvalue(const ComparisonMatrix& a,
                                     const PowerOptions& opts = {}) {
  const Eigen::MatrixXd& m = a.entries();
  const int n = a.order();
  const double residual_tol = opts.residual_factor * m.norm();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  double lambda = 0.0;
  EigenResult result;
  for (int it = 1; it <= opts.max_iters; ++it) {
    Eigen::VectorXd w = m * v;
    const double norm_w = w.norm();
    if (!(norm_w > 0.0))
      throw NoConvergence("power iteration collapsed to zero vector");
    const double lambda_new = v.dot(w);  // Rayleigh quotient (unit v)
    v = w / norm_w;
    const double residual = (m * v - lambda_new * v).norm();
    const bool settled =
        std::abs(lambda_new - lambda) <= opts.rel_tol * std::abs(lambda_new);
    lambda = lambda_new;
    if (settled && residual <= residual_tol) {
      result.lambda_max = lambda;
      result.right_vector = v;
      result.iterations = it;
      result.residual = residual;
      return result;
    }
  }
  throw NoConvergence("power iteration did not converge in " +
                      std::to_string(opts.max_iters) + " iterations");
}

/// Fraction of ordered triples (i, j, l) with a_il * a_lj = a_ij within a
/// log-ratio tolerance tau.
inline double consistency_degree(const ComparisonMatrix& a, double tau = 1e-9) {
  const Eigen::MatrixXd& m = a.entries();
  const int n = a.order();
  long long consistent = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        if (std::abs(std::log(m(i, l) * m(l, j) / m(i, j))) <= tau) ++consistent;
  return static_cast<double>(consistent) / (static_cast<double>(n) * n * n);
}

/// Average perturbation statistic (lambda_max - n) / (n - 1). Zero for a
/// consistent matrix; may be negative for approximated slices.
inline double inconsistency(double lambda_max, int n) {
  if (n < 2) throw DegenerateOrder("inconsistency needs order >= 2");
  return (lambda_max - static_cast<double>(n)) / (static_cast<double>(n) - 1.0);
}

namespace detail {

/// Adjugate by cofactor determinants, each via partial-pivot LU.
inline Eigen::MatrixXd adjugate(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1.0;
    return adj;
  }
  Eigen::MatrixXd minor(n - 1, n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int r = 0, mr = 0; r < n; ++r) {
        if (r == j) continue;  // adj(i,j) = cofactor(j,i)
        for (int c = 0, mc = 0; c < n; ++c) {
          if (c == i) continue;
          minor(mr, mc) = m(r, c);
          ++mc;
        }
        ++mr;
      }
      const double det = minor.partialPivLu().determinant();
      adj(i, j) = (((i + j) % 2 == 0) ? 1.0 : -1.0) * det;
    }
  }
  return adj;
}

}  // namespace detail

/// Eigenvalue sensitivity ||adj(lambda I - A)||_2 / |p'_A(lambda)|. The
/// derivative of the characteristic polynomial equals the trace of the
/// adjugate (Jacobi's formula), which reduces to N^(N-1) at lambda = N for
/// the reciprocal family.
inline double condition_number(const ComparisonMatrix& a, double lambda) {
  const int n = a.order();
  if (n > 10) throw OrderCapExceeded("condition_number capped at order 10");
  const Eigen::MatrixXd shifted =
      lambda * Eigen::MatrixXd::Identity(n, n) - a.entries();
  const Eigen::MatrixXd adj = detail::adjugate(shifted);
  const double p_prime = adj.trace();
  if (std::abs(p_prime) < 1e-14)
    throw DerivativeNearZero("characteristic-polynomial derivative ~ 0; "
                             "eigenvalue is not simple");
  const double spectral_norm =
      Eigen::JacobiSVD<Eigen::MatrixXd>(adj).singularValues()(0);
  return spectral_norm / std::abs(p_prime);
}

/// Matrix permanent by Ryser's inclusion-exclusion with Gray-code updates,
/// O(2^N * N). Exact up to floating accumulation.
inline double permanent(const ComparisonMatrix& a) {
  const int n = a.order();
  if (n > 12) throw OrderCapExceeded("permanent capped at order 12");
  const Eigen::MatrixXd& m = a.entries();
  std::vector<double> row_sums(n, 0.0);
  double total = 0.0;
  const unsigned long long subsets = 1ULL << n;
  unsigned long long gray_prev = 0;
  int popcount = 0;
  for (unsigned long long k = 1; k < subsets; ++k) {
    const unsigned long long gray = k ^ (k >> 1);
    const unsigned long long changed = gray ^ gray_prev;
    const int col = std::countr_zero(changed);
    const bool added = (gray & changed) != 0;
    popcount += added ? 1 : -1;
    for (int i = 0; i < n; ++i)
      row_sums[i] += added ? m(i, col) : -m(i, col);
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= row_sums[i];
    total += ((n - popcount) % 2 == 0) ? prod : -prod;
    gray_prev = gray;
  }
  return total;
}

/// Hyperbolic sine of a matrix by its odd Taylor series, truncated when the
/// term norm falls below 1e-15 of the accumulated result.
inline Eigen::MatrixXd sinh_matrix(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd term = m;  // A^1 / 1!
  Eigen::MatrixXd sum = term;
  const Eigen::MatrixXd m2 = m * m;
  for (int k = 3; k <= 301; k += 2) {
    term = (term * m2) / (static_cast<double>(k - 1) * static_cast<double>(k));
    sum += term;
    if (term.norm() <= 1e-15 * sum.norm()) return sum;
    if (!sum.allFinite()) throw OverflowRisk("sinh series overflowed");
  }
  throw NoConvergence("sinh series did not settle within 150 terms");
}

namespace detail {

/// Characteristic polynomial coefficients [1, b_1, ..., b_N] of
/// det(lambda I - A) by the Faddeev-LeVerrier recursion.
inline std::vector<double> charpoly_coefficients(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> coeff(n + 1, 0.0);
  coeff[0] = 1.0;
  Eigen::MatrixXd mk = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    mk = a * mk + coeff[k - 1] * Eigen::MatrixXd::Identity(n, n);
    coeff[k] = -(a * mk).trace() / static_cast<double>(k);
  }
  return coeff;
}

inline double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

}  // namespace detail

/// Deviations of a matrix from the closed-form identities satisfied by
/// reciprocal consistent matrices of order N:
///   A^k = N^(k-1) A, sinh(A) = (sinh N / N) A, Tr sinh(A) = sinh N,
///   char poly = lambda^N - N lambda^(N-1).
struct IdentityReport {
  int order = 0;
  int power_k = 2;
  double power_residual = 0.0;  // relative Frobenius
  double sinh_residual = 0.0;   // relative Frobenius
  double trace_residual = 0.0;  // absolute
  /// |b_k| / (binom(N,k) * max(1, ||A||_F)^k) for k = 2..N; all ~ 0 for a
  /// consistent matrix.
  std::vector<double> charpoly_residuals;
};

inline IdentityReport identity_residuals(const ComparisonMatrix& a, int power_k = 2) {
  const int n = a.order();
  if (n > 10) throw OrderCapExceeded("identity_residuals capped at order 10");
  if (power_k < 1 || power_k > 5)
    throw OverflowRisk("power identity exercised for k in [1, 5] only");
  const Eigen::MatrixXd& m = a.entries();
  const double scale = std::pow(static_cast<double>(n), power_k - 1);
  if (scale * m.cwiseAbs().maxCoeff() > 1e300)
    throw OverflowRisk("N^(k-1) * max|a_ij| exceeds representable range");

  IdentityReport report;
  report.order = n;
  report.power_k = power_k;

  Eigen::MatrixXd power = m;
  for (int i = 1; i < power_k; ++i) power = power * m;
  const Eigen::MatrixXd target = scale * m;
  report.power_residual = (power - target).norm() / target.norm();

  const Eigen::MatrixXd sh = sinh_matrix(m);
  const double sinh_n = std::sinh(static_cast<double>(n));
  const Eigen::MatrixXd sh_target = (sinh_n / n) * m;
  report.sinh_residual = (sh - sh_target).norm() / sh_target.norm();
  report.trace_residual = std::abs(sh.trace() - sinh_n);

  const auto coeff = detail::charpoly_coefficients(m);
  const double a_norm = std::max(1.0, m.norm());
  for (int k = 2; k <= n; ++k)
    report.charpoly_residuals.push_back(
        std::abs(coeff[k]) / (detail::binomial(n, k) * std::pow(a_norm, k)));
  return report;
}

}  // namespace fcix::rpcm
