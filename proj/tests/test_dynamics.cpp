#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fcix/dynamics.hpp"
#include "helpers.hpp"

using Catch::Approx;
using namespace fcix;

namespace {

const dynamics::SystemParams kReference{0.005, 0.022, 0.678, 1.671, 0.160};

}  // namespace

TEST_CASE("interior critical point matches the reference estimates", "[dynamics]") {
  const auto points = dynamics::critical_points(kReference);
  const auto& interior = points[0];
  REQUIRE(interior.F == Approx(0.006).margin(1e-3));
  REQUIRE(interior.V == Approx(75.954).margin(1e-3));
  REQUIRE(interior.dim_unstable == 2);
  REQUIRE(interior.dim_stable == 0);
  REQUIRE(interior.dim_center == 0);
  REQUIRE(interior.classification == dynamics::Classification::source);
  REQUIRE(interior.practical);
  // Eigenvalues at the interior point are (alpha, delta) analytically.
  REQUIRE(interior.eigenvalues[0].real() == Approx(0.005).margin(1e-12));
  REQUIRE(interior.eigenvalues[1].real() == Approx(1.671).margin(1e-12));

  for (int i = 1; i < 4; ++i) REQUIRE_FALSE(points[static_cast<std::size_t>(i)].practical);
}

TEST_CASE("boundary and unit-parameter critical points", "[dynamics]") {
  dynamics::SystemParams unit{1.0, 1.0, 1.0, 1.0, 0.0};
  const auto points = dynamics::critical_points(unit);
  REQUIRE(points[0].F == Approx(1.0));
  REQUIRE(points[0].V == Approx(1.0));
  REQUIRE(points[1].F == 0.0);
  REQUIRE(points[1].V == 0.0);
  REQUIRE(points[2].F == Approx(1.0));
  REQUIRE(points[2].V == 0.0);
  REQUIRE(points[3].F == 0.0);
  REQUIRE(points[3].V == Approx(1.0));

  // alpha = 0: the interior point collapses onto the boundary.
  dynamics::SystemParams zero_alpha = kReference;
  zero_alpha.alpha = 0.0;
  REQUIRE(dynamics::critical_points(zero_alpha)[0].F == 0.0);

  dynamics::SystemParams degenerate = kReference;
  degenerate.beta = 0.0;
  REQUIRE_THROWS_AS(dynamics::critical_points(degenerate),
                    DegenerateParameters);
}

TEST_CASE("jacobian is the exact derivative of the field", "[dynamics]") {
  const double f1 = kReference.alpha / (kReference.gamma + kReference.theta);
  const double v1 = kReference.delta / kReference.beta;
  const Eigen::Matrix2d at_interior = dynamics::jacobian(kReference, f1, v1);
  REQUIRE(at_interior(0, 0) == Approx(kReference.alpha).margin(1e-12));
  REQUIRE(at_interior(1, 1) == Approx(kReference.delta).margin(1e-12));
  REQUIRE(at_interior(0, 1) == 0.0);
  REQUIRE(at_interior(1, 0) == 0.0);

  const Eigen::Matrix2d at_origin = dynamics::jacobian(kReference, 0.0, 0.0);
  REQUIRE(at_origin(0, 0) == Approx(-kReference.alpha));
  REQUIRE(at_origin(1, 1) == Approx(-kReference.delta));

  // Finite differences across random states.
  auto gen = testutil::rng(103);
  std::uniform_real_distribution<double> state(0.0, 50.0);
  const double h = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    const double f = state(gen), v = state(gen);
    const Eigen::Matrix2d analytic = dynamics::jacobian(kReference, f, v);
    Eigen::Matrix2d fd;
    fd.col(0) = (dynamics::rhs(kReference, f + h, v) - dynamics::rhs(kReference, f - h, v)) / (2 * h);
    fd.col(1) = (dynamics::rhs(kReference, f, v + h) - dynamics::rhs(kReference, f, v - h)) / (2 * h);
    REQUIRE((analytic - fd).norm() <= 1e-6);
  }

  const Eigen::Matrix2d printed =
      dynamics::jacobian_with_cross_terms(kReference, f1, v1);
  REQUIRE(printed(0, 1) == Approx(kReference.theta));
  REQUIRE(printed(1, 0) == Approx(kReference.theta));
}

TEST_CASE("classification by eigenvalue signs", "[dynamics]") {
  const auto origin = dynamics::classify(kReference, 0.0, 0.0);
  REQUIRE(origin.classification == dynamics::Classification::sink);
  REQUIRE(origin.eigenvalues[0] == std::complex<double>(-kReference.alpha, 0.0));
  REQUIRE(origin.eigenvalues[1] == std::complex<double>(-kReference.delta, 0.0));

  const double f1 = kReference.alpha / (kReference.gamma + kReference.theta);
  const auto saddle = dynamics::classify(kReference, f1, 0.0);
  REQUIRE(saddle.classification == dynamics::Classification::saddle);
  REQUIRE(saddle.dim_stable + saddle.dim_unstable + saddle.dim_center == 2);
}

TEST_CASE("field vanishes at every critical point", "[dynamics]") {
  for (const auto& cp : dynamics::critical_points(kReference)) {
    const Eigen::Vector2d f = dynamics::rhs(kReference, cp.F, cp.V);
    REQUIRE(std::abs(f(0)) <= 1e-12);
    REQUIRE(std::abs(f(1)) <= 1e-12);
    REQUIRE(cp.dim_stable + cp.dim_unstable + cp.dim_center == 2);
  }
}

TEST_CASE("trajectories respect the phase portrait", "[dynamics]") {
  const auto points = dynamics::critical_points(kReference);
  const double f1 = points[0].F, v1 = points[0].V;

  // Start exactly at the critical point: stays put.
  const auto fixed = dynamics::trajectory(kReference, f1, v1, 0.01, 500);
  for (std::size_t i = 0; i < fixed.t.size(); ++i) {
    REQUIRE(fixed.F[i] == Approx(f1).margin(1e-10));
    REQUIRE(fixed.V[i] == Approx(v1).margin(1e-10));
  }

  // Slightly below the source: both coordinates decay toward the origin.
  const auto below = dynamics::trajectory(kReference, 0.99 * f1, 0.99 * v1, 0.01, 2000);
  REQUIRE(below.F.back() < 0.99 * f1);
  REQUIRE(below.V.back() < 0.99 * v1);
  REQUIRE(below.F.back() >= 0.0);

  // Slightly above: the quadratic terms blow up in finite time.
  REQUIRE_THROWS_AS(
      dynamics::trajectory(kReference, 1.01 * f1, 1.01 * v1, 0.5, 100000),
      Blowup);
}

TEST_CASE("integrator matches linearized decay near the origin", "[dynamics]") {
  // Near (0, 0) the field is approximately diag(-alpha, -delta).
  dynamics::SystemParams p{0.8, 1.0, 1.0, 1.2, 0.0};
  const double eps = 1e-9;
  const auto path = dynamics::trajectory(p, eps, eps, 1e-3, 1000);  // t = 1
  REQUIRE(path.F.back() == Approx(eps * std::exp(-0.8)).epsilon(0.01));
  REQUIRE(path.V.back() == Approx(eps * std::exp(-1.2)).epsilon(0.01));
}
