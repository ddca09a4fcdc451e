#include <doctest.h>

#include <random>

#include "quasiseg/oracle.hpp"
#include "testkit.hpp"

using namespace quasiseg;

namespace {

// Independent enumeration: every labelling in [0,g)^n, keeping those that use
// all g labels. Exponential but fine for n <= 7.
double brute_force(const std::vector<ColorVec>& px, std::size_t g, const GridShape* grid = nullptr) {
  const std::size_t n = px.size();
  std::vector<std::size_t> labels(n, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    std::vector<bool> used(g, false);
    for (auto l : labels) used[l] = true;
    if (std::all_of(used.begin(), used.end(), [](bool b) { return b; }) &&
        (grid == nullptr || testkit::labels_connected(*grid, labels))) {
      best = std::min(best, testkit::partition_scatter(px, labels));
    }
    std::size_t i = 0;
    while (i < n && ++labels[i] == g) labels[i++] = 0;
    if (i == n) break;
  }
  return best;
}

}  // namespace

TEST_CASE("optimal_partition basics") {
  const auto items = testkit::gray_stats({0, 1, 10, 11});
  const auto two = optimal_partition(items, 2);
  CHECK(two.error == 1.0);
  CHECK(two.assignment == std::vector<int>{0, 0, 1, 1});
  CHECK(optimal_partition(items, 4).error == 0.0);
  CHECK(optimal_partition(items, 1).error == cluster_error(stats_of_pixels(testkit::gray({0, 1, 10, 11}))));
}

TEST_CASE("optimal_curve of (0,1,10,11)") {
  const auto curve = optimal_curve(testkit::gray_stats({0, 1, 10, 11}), 4);
  REQUIRE(curve.rows.size() == 4);
  CHECK(curve.rows[0].error == 101.0);
  CHECK(curve.rows[1].error == 1.0);
  CHECK(curve.rows[2].error == 0.5);
  CHECK(curve.rows[3].error == 0.0);
}

TEST_CASE("optimal_partition agrees with brute force labelling") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 15; ++trial) {
    const auto px = testkit::random_pixels(rng, 3 + trial % 5, trial % 2 ? 3 : 1);
    const auto curve = optimal_curve(testkit::to_stats(px), px.size());
    for (std::size_t g = 1; g <= px.size(); ++g) {
      CHECK(testkit::close_rel(curve.rows[g - 1].error, brute_force(px, g), 1e-9));
      const auto best = optimal_partition(testkit::to_stats(px), g);
      CHECK(testkit::close_rel(testkit::partition_scatter(px, best.assignment), best.error, 1e-9));
    }
    for (std::size_t g = 1; g < px.size(); ++g) CHECK(curve.rows[g].error <= curve.rows[g - 1].error);
  }
}

TEST_CASE("optimal_connected_partition") {
  const auto row = testkit::gray_image(3, 1, {0, 1, 5});
  const auto p = optimal_connected_partition(row, 2);
  CHECK(p.error == 0.5);
  CHECK(p.assignment == std::vector<int>{0, 0, 1});

  // Ends of the row share a value but cannot form one region.
  const auto ends = testkit::gray_image(3, 1, {0, 200, 0});
  CHECK(optimal_partition(ends.pixel_stats(), 2).error == 0.0);
  CHECK(optimal_connected_partition(ends, 2).error == 20000.0);

  const auto corner = testkit::gray_image(2, 2, {10, 10, 10, 250});
  const auto c = optimal_connected_partition(corner, 2);
  CHECK(c.assignment == std::vector<int>{0, 0, 0, 1});
  CHECK(c.error == 0.0);

  const auto flat = testkit::gray_image(3, 2, {4, 4, 4, 4, 4, 4});
  for (std::size_t g = 1; g <= 6; ++g) CHECK(optimal_connected_partition(flat, g).error == 0.0);
}

TEST_CASE("optimal_connected_curve agrees with brute force") {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 8; ++trial) {
    const auto img = testkit::random_image(rng, 2 + trial % 2, 2, 1);
    const auto px = testkit::pixels_of(img);
    const auto curve = optimal_connected_curve(img, px.size());
    const auto grid = img.shape();
    for (std::size_t g = 1; g <= px.size(); ++g) {
      CHECK(testkit::close_rel(curve.rows[g - 1].error, brute_force(px, g, &grid), 1e-9));
    }
  }
}

TEST_CASE("oracle limits") {
  std::mt19937_64 rng(73);
  const auto big = testkit::to_stats(testkit::random_pixels(rng, 13, 1));
  CHECK_THROWS_AS(optimal_partition(big, 2), CapacityError);
  CHECK_THROWS_AS(optimal_partition({}, 1), std::invalid_argument);
  const auto items = testkit::gray_stats({1, 2});
  CHECK_THROWS_AS(optimal_partition(items, 3), std::out_of_range);
  CHECK_THROWS_AS(optimal_partition(items, 0), std::out_of_range);
}

TEST_CASE("optimal curves are recorded for convexity") {
  std::mt19937_64 rng(74);
  int convex = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto curve = optimal_curve(testkit::to_stats(testkit::random_pixels(rng, 8, 3)), 8);
    std::vector<double> e;
    for (const auto& row : curve.rows) e.push_back(row.error);
    convex += testkit::convex_curve(e, 1e-9 * e.front());
  }
  MESSAGE("convex optimal curves: " << convex << "/20");
}
