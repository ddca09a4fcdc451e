#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "quasiseg/oracle.hpp"
#include "quasiseg/ward.hpp"
#include "testkit.hpp"

using namespace quasiseg;

namespace {

// Textbook greedy agglomeration: rescans every pair at each step.
std::vector<double> greedy_costs(std::vector<ClusterStats> items) {
  std::vector<double> costs;
  while (items.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (std::size_t j = i + 1; j < items.size(); ++j) {
        const double c = merge_increment(items[i], items[j]);
        if (c < best) best = c, bi = i, bj = j;
      }
    }
    costs.push_back(best);
    items[bi] = merge_stats(items[bi], items[bj]);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return costs;
}

std::vector<double> costs_by_rank(const Hierarchy& h) {
  std::vector<double> out;
  for (NodeId id : h.merge_order()) out.push_back(h.node(id).merge_cost);
  return out;
}

}  // namespace

TEST_CASE("ward_cluster small cases") {
  const auto one = ward_cluster(testkit::gray_stats({3}));
  CHECK(one.node_count() == 1);

  const auto h = ward_cluster(testkit::gray_stats({0, 1, 5}));
  CHECK(h.node(3).left == 0);
  CHECK(h.node(3).right == 1);
  CHECK(h.node(3).merge_cost == 0.5);
  CHECK(h.node(4).merge_cost == 13.5);

  const auto four = ward_cluster(testkit::gray_stats({0, 1, 10, 11}));
  const auto costs = costs_by_rank(four);
  CHECK(costs == std::vector<double>{0.5, 0.5, 100.0});
  CHECK(cut_at(four, 2).labels[0] == cut_at(four, 2).labels[1]);
  CHECK(cut_at(four, 2).labels[2] == cut_at(four, 2).labels[3]);
  // Equal-cost pairs resolve to the lower ids first.
  CHECK(four.merge_order().front() == 4);
  CHECK(four.node(4).left == 0);
}

TEST_CASE("ward_cluster input checks") {
  CHECK_THROWS_AS(ward_cluster({}), std::invalid_argument);
  std::vector<ClusterStats> mixed = {ClusterStats::of_pixel(ColorVec::gray(1)),
                                     ClusterStats::of_pixel(ColorVec::rgb(1, 1, 1))};
  CHECK_THROWS_AS(ward_cluster(mixed), StructuralError);
  std::vector<ClusterStats> with_empty = {ClusterStats::of_pixel(ColorVec::gray(1)), ClusterStats{}};
  CHECK_THROWS_AS(ward_cluster(with_empty), std::invalid_argument);
}

TEST_CASE("ward_cluster matches naive greedy agglomeration") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto items = testkit::to_stats(testkit::random_pixels(rng, 2 + trial * 3, 3));
    const auto h = ward_cluster(items);
    const auto want = greedy_costs(items);
    const auto got = costs_by_rank(h);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(testkit::close_rel(got[k], want[k], 1e-9));
  }
}

TEST_CASE("ward_cluster costs are non-decreasing and the curve convex") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = ward_cluster(testkit::to_stats(testkit::random_pixels(rng, 1 + trial * 10, trial % 2 ? 3 : 1)));
    const auto costs = costs_by_rank(h);
    CHECK(std::is_sorted(costs.begin(), costs.end()));
    const auto e = testkit::curve_errors(h);
    CHECK(testkit::convex_curve(e, 1e-9 * e.front()));
  }
}

TEST_CASE("ward_cluster weighted items") {
  // Clusters of different size are treated as atoms with their own weight.
  std::vector<ClusterStats> items = {stats_of_pixels(testkit::gray({0, 0, 0, 0})),
                                     ClusterStats::of_pixel(ColorVec::gray(3)),
                                     ClusterStats::of_pixel(ColorVec::gray(5))};
  const auto h = ward_cluster(items);
  CHECK(h.node(3).left == 1);
  CHECK(h.node(3).right == 2);
  CHECK(h.node(3).merge_cost == 2.0);
}

TEST_CASE("ward_cluster never beats the exhaustive optimum") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const auto items = testkit::to_stats(testkit::random_pixels(rng, 8, 3));
    const auto h = ward_cluster(items);
    const auto opt = optimal_curve(items, 8);
    for (std::size_t g = 1; g <= 8; ++g) {
      CHECK(cut_at(h, g).total_error >= opt.rows[g - 1].error * (1 - 1e-12));
    }
  }
}

TEST_CASE("ward_merges reports item indices") {
  const auto merges = ward_merges(testkit::gray_stats({0, 1, 5}));
  REQUIRE(merges.size() == 2);
  CHECK(merges[0].first == 0);
  CHECK(merges[0].second == 1);
  CHECK(merges[0].cost == 0.5);
  CHECK(merges[1].first == 2);
  CHECK(merges[1].second == 3);
}
