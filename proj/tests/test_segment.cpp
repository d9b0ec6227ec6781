#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fcix/segment.hpp"
#include "helpers.hpp"

using Catch::Approx;
using namespace fcix;

TEST_CASE("median bandwidth", "[segment]") {
  REQUIRE(segment::median_bandwidth(std::vector<double>{0.0, 1.0}).gamma == Approx(1.0));

  const auto degenerate = segment::median_bandwidth(std::vector<double>{0.0, 0.0, 0.0});
  REQUIRE(degenerate.gamma == 1.0);
  REQUIRE(degenerate.degenerate);

  // pairs of (0,1,2): squared distances {1, 4, 1}, median 1.
  const auto three = segment::median_bandwidth(std::vector<double>{0.0, 1.0, 2.0});
  REQUIRE(three.gamma == Approx(1.0));
  REQUIRE_FALSE(three.degenerate);

  REQUIRE_THROWS_AS(segment::median_bandwidth(std::vector<double>{1.0}),
                    SeriesTooShort);
}

TEST_CASE("segment cost reference values", "[segment]") {
  const std::vector<double> constant(10, 3.5);
  REQUIRE(segment::segment_cost(constant, 0, 10, 2.0) == Approx(0.0).margin(1e-12));
  REQUIRE(segment::segment_cost(constant, 4, 5, 2.0) == 0.0);

  // Two points 0 and 10 with gamma 1: 2 - (2 + 2 e^-100)/2 = 1 - e^-100.
  const std::vector<double> pair = {0.0, 10.0};
  REQUIRE(segment::segment_cost(pair, 0, 2, 1.0) ==
          Approx(1.0 - std::exp(-100.0)).margin(1e-15));

  REQUIRE_THROWS_AS(segment::segment_cost(pair, 1, 1, 1.0), EmptySegment);
}

TEST_CASE("precomputed costs agree with the direct sum", "[segment]") {
  auto gen = testutil::rng(33);
  const auto series = testutil::gaussian_series(gen, 40);
  const segment::KernelCost kernel(series, 0.7);
  for (int a = 0; a < 40; a += 3)
    for (int b = a + 1; b <= 40; b += 4)
      REQUIRE(kernel.cost(a, b) ==
              Approx(segment::segment_cost(series, a, b, 0.7)).margin(1e-9));
}

TEST_CASE("mean shift is found exactly", "[segment]") {
  std::vector<double> series(100, 0.0);
  for (int t = 50; t < 100; ++t) series[t] = 1.0;
  const auto result = segment::detect_changepoints(series, 1, 1.0);
  REQUIRE(result.changepoints == std::vector<int>{50});
  REQUIRE(result.total_cost ==
          Approx(result.segment_costs[0] + result.segment_costs[1]).margin(1e-9));
}

TEST_CASE("constant series ties break to the smallest index", "[segment]") {
  const std::vector<double> series(20, 2.0);
  const auto result = segment::detect_changepoints(series, 1, 1.0);
  REQUIRE(result.changepoints == std::vector<int>{2});  // min segment length
  REQUIRE(result.total_cost == 0.0);
}

TEST_CASE("dynamic program equals exhaustive search", "[segment]") {
  auto gen = testutil::rng(35);
  std::uniform_int_distribution<int> len(8, 24);
  std::uniform_int_distribution<int> ks(1, 3);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = len(gen);
    const int k = std::min(ks(gen), n / 2 - 1);
    if (k < 1) continue;
    const auto series = testutil::gaussian_series(gen, n);
    const double gamma = segment::median_bandwidth(series).gamma;
    const auto dp = segment::detect_changepoints(series, k, gamma);
    const auto brute = testutil::brute_force_segmentation(series, k, gamma);
    REQUIRE(dp.changepoints == brute.changepoints);
    REQUIRE(dp.total_cost == Approx(brute.total_cost).margin(1e-9));
  }
}

TEST_CASE("cost is nonincreasing in the number of change points", "[segment]") {
  auto gen = testutil::rng(39);
  const auto series = testutil::gaussian_series(gen, 60);
  const auto reports = segment::elbow_report(series, 4, 1.0);
  REQUIRE(reports.size() == 4);
  for (std::size_t i = 1; i < reports.size(); ++i)
    REQUIRE(reports[i].total_cost <= reports[i - 1].total_cost + 1e-9);
}

TEST_CASE("translation invariance and scale covariance", "[segment]") {
  auto gen = testutil::rng(43);
  const auto series = testutil::gaussian_series(gen, 50);
  const auto base = segment::detect_changepoints(series, 2, 1.3);

  std::vector<double> shifted(series);
  for (auto& v : shifted) v += 17.5;
  const auto shifted_result = segment::detect_changepoints(shifted, 2, 1.3);
  REQUIRE(shifted_result.changepoints == base.changepoints);
  REQUIRE(shifted_result.total_cost == Approx(base.total_cost).margin(1e-9));

  const double c = 3.0;
  std::vector<double> scaled(series);
  for (auto& v : scaled) v *= c;
  const auto scaled_result = segment::detect_changepoints(scaled, 2, 1.3 / (c * c));
  REQUIRE(scaled_result.changepoints == base.changepoints);
  REQUIRE(scaled_result.total_cost == Approx(base.total_cost).margin(1e-9));
}

TEST_CASE("two-regime recovery within two indices", "[segment]") {
  auto gen = testutil::rng(47);
  std::vector<double> series;
  auto first = testutil::gaussian_series(gen, 50, 0.0, 0.4);
  auto second = testutil::gaussian_series(gen, 50, 3.0, 0.4);
  series.insert(series.end(), first.begin(), first.end());
  series.insert(series.end(), second.begin(), second.end());
  const double gamma = segment::median_bandwidth(series).gamma;
  const auto result = segment::detect_changepoints(series, 1, gamma);
  REQUIRE(std::abs(result.changepoints[0] - 50) <= 2);
}

TEST_CASE("partition feasibility", "[segment]") {
  const std::vector<double> tiny = {1.0, 2.0, 3.0};
  REQUIRE_THROWS_AS(segment::detect_changepoints(tiny, 1, 1.0), InfeasiblePartition);
  REQUIRE_THROWS_AS(segment::detect_changepoints(tiny, 0, 1.0), InvalidParameter);
}
