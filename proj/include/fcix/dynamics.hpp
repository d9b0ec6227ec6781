#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "fcix/errors.hpp"

namespace fcix::dynamics {

/// Parameters of the coupled information-flow system
///   dF/dt = (gamma + theta) F^2 - alpha F,
///   dV/dt = beta V^2 - delta V.
/// alpha, beta are the two directional transfer entropies, gamma, delta the
/// self-entropies, theta the approximate entropy of the cross
/// impulse-response path. beta and gamma + theta must be nonzero to keep
/// the interior critical point bounded.
struct SystemParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double theta = 0.0;

  void validate() const {
    if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0 && delta >= 0.0 && theta >= 0.0))
      throw DegenerateParameters("parameters must be nonnegative");
    if (beta == 0.0 || gamma + theta == 0.0)
      throw DegenerateParameters("beta and gamma + theta must be nonzero");
  }
};

enum class Classification { source, sink, saddle, center, degenerate };

inline std::string to_string(Classification c) {
  switch (c) {
    case Classification::source: return "source";
    case Classification::sink: return "sink";
    case Classification::saddle: return "saddle";
    case Classification::center: return "center";
    default: return "degenerate";
  }
}

struct CriticalPoint {
  double F = 0.0;
  double V = 0.0;
  std::array<std::complex<double>, 2> eigenvalues;
  int dim_stable = 0;
  int dim_unstable = 0;
  int dim_center = 0;
  Classification classification = Classification::degenerate;
  /// Boundary points are computed but flagged as theoretical only.
  bool practical = true;
};

inline Eigen::Vector2d rhs(const SystemParams& p, double F, double V) {
  return {(p.gamma + p.theta) * F * F - p.alpha * F, p.beta * V * V - p.delta * V};
}

/// Exact Jacobian of the system: dV/dt contains no F and vice versa, so it
/// is diagonal.
inline Eigen::Matrix2d jacobian(const SystemParams& p, double F, double V) {
  Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
  j(0, 0) = 2.0 * (p.gamma + p.theta) * F - p.alpha;
  j(1, 1) = 2.0 * p.beta * V - p.delta;
  return j;
}

/// Variant with theta in both off-diagonal entries. Kept for comparison;
/// it is not the derivative of the system above, and the default analysis
/// does not use it.
inline Eigen::Matrix2d jacobian_with_cross_terms(const SystemParams& p, double F,
                                                 double V) {
  Eigen::Matrix2d j = jacobian(p, F, V);
  j(0, 1) = p.theta;
  j(1, 0) = p.theta;
  return j;
}

/// Stability classification from the eigenvalues of a 2x2 Jacobian
/// (closed-form roots); manifold dimensions count real-part signs with a
/// 1e-12 tolerance for the center class.
inline CriticalPoint classify(const SystemParams& p, double F, double V,
                              bool practical = true) {
  const Eigen::Matrix2d j = jacobian(p, F, V);
  CriticalPoint point;
  point.F = F;
  point.V = V;
  point.practical = practical;
  if (j(0, 1) == 0.0 && j(1, 0) == 0.0) {
    // Diagonal Jacobian: the eigenvalues are the diagonal entries, exactly.
    point.eigenvalues = {std::complex<double>(j(0, 0), 0.0),
                         std::complex<double>(j(1, 1), 0.0)};
  } else {
    const double tr = j(0, 0) + j(1, 1);
    const double det = j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0);
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
    point.eigenvalues = {0.5 * (tr + disc), 0.5 * (tr - disc)};
  }
  constexpr double kCenterTol = 1e-12;
  bool has_imag = false;
  for (const auto& ev : point.eigenvalues) {
    if (std::abs(ev.real()) <= kCenterTol)
      ++point.dim_center;
    else if (ev.real() > 0.0)
      ++point.dim_unstable;
    else
      ++point.dim_stable;
    if (std::abs(ev.imag()) > kCenterTol) has_imag = true;
  }
  if (point.dim_unstable == 2)
    point.classification = Classification::source;
  else if (point.dim_stable == 2)
    point.classification = Classification::sink;
  else if (point.dim_stable == 1 && point.dim_unstable == 1)
    point.classification = Classification::saddle;
  else if (point.dim_center == 2 && has_imag)
    point.classification = Classification::center;
  else
    point.classification = Classification::degenerate;
  return point;
}

/// The four analytic critical points: the interior point
/// (alpha/(gamma+theta), delta/beta) first, then the boundary points, which
/// are flagged as theoretical only.
inline std::array<CriticalPoint, 4> critical_points(const SystemParams& p) {
  p.validate();
  const double f_star = p.alpha / (p.gamma + p.theta);
  const double v_star = p.delta / p.beta;
  return {classify(p, f_star, v_star, true), classify(p, 0.0, 0.0, false),
          classify(p, f_star, 0.0, false), classify(p, 0.0, v_star, false)};
}

struct Trajectory {
  std::vector<double> t;
  std::vector<double> F;
  std::vector<double> V;
};

/// Fourth-order Runge-Kutta path of the system. Throws Blowup once the
/// state magnitude passes 1e12 (the quadratic terms diverge above the
/// interior point).
inline Trajectory trajectory(const SystemParams& p, double f0, double v0,
                             double dt, int steps) {
  p.validate();
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  Trajectory path;
  path.t.reserve(static_cast<std::size_t>(steps) + 1);
  path.F.reserve(static_cast<std::size_t>(steps) + 1);
  path.V.reserve(static_cast<std::size_t>(steps) + 1);
  Eigen::Vector2d state(f0, v0);
  constexpr double kBlowup = 1e12;
  for (int s = 0; s <= steps; ++s) {
    if (!state.allFinite() || state.cwiseAbs().maxCoeff() > kBlowup)
      throw Blowup("trajectory exceeded 1e12 after " + std::to_string(s) + " steps");
    path.t.push_back(s * dt);
    path.F.push_back(state(0));
    path.V.push_back(state(1));
    if (s == steps) break;
    const Eigen::Vector2d k1 = rhs(p, state(0), state(1));
    const Eigen::Vector2d s2 = state + 0.5 * dt * k1;
    const Eigen::Vector2d k2 = rhs(p, s2(0), s2(1));
    const Eigen::Vector2d s3 = state + 0.5 * dt * k2;
    const Eigen::Vector2d k3 = rhs(p, s3(0), s3(1));
    const Eigen::Vector2d s4 = state + dt * k3;
    const Eigen::Vector2d k4 = rhs(p, s4(0), s4(1));
    state += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return path;
}

}  // namespace fcix::dynamics
