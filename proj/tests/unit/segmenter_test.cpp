#include <doctest.h>

#include <random>

#include "quasiseg/restructurer.hpp"
#include "quasiseg/segmenter.hpp"
#include "testkit.hpp"

using namespace quasiseg;

namespace {

void check_identical(const Hierarchy& a, const Hierarchy& b) {
  REQUIRE(a.node_count() == b.node_count());
  CHECK(std::equal(a.leaf_labels().begin(), a.leaf_labels().end(), b.leaf_labels().begin()));
  for (std::size_t id = 0; id < a.node_count(); ++id) {
    const auto& x = a.node(id);
    const auto& y = b.node(id);
    CHECK(x.left == y.left);
    CHECK(x.right == y.right);
    CHECK(x.merge_rank == y.merge_rank);
    CHECK(x.stats == y.stats);
    CHECK(x.merge_cost == y.merge_cost);
  }
}

}  // namespace

TEST_CASE("build_rag counts regions and edges") {
  for (auto [w, h, edges] : {std::tuple{1, 1, 0}, {2, 2, 4}, {3, 3, 12}, {5, 2, 13}}) {
    ImageRaster img;
    img.width = w;
    img.height = h;
    img.samples.assign(static_cast<std::size_t>(w * h), 0);
    const auto rag = build_rag(img);
    CHECK(rag.region_count() == static_cast<std::size_t>(w * h));
    CHECK(rag.edge_count() == static_cast<std::size_t>(edges));
    CHECK(rag.edges().size() == static_cast<std::size_t>(edges));
  }
}

TEST_CASE("AdjacencyGraph contract") {
  AdjacencyGraph g(GridShape{2, 2});
  CHECK(g.neighbors(0) == std::vector<NodeId>{1, 2});
  g.contract(0, 1, 4);
  CHECK(g.region_count() == 3);
  CHECK_FALSE(g.contains(0));
  CHECK(g.neighbors(4) == std::vector<NodeId>{2, 3});
  CHECK(g.edge_count() == 3);
  CHECK(g.neighbors(2) == std::vector<NodeId>{3, 4});
}

TEST_CASE("greedy_segment on tiny rows") {
  const auto h = greedy_segment(testkit::gray_image(3, 1, {0, 1, 5}));
  CHECK(h.node(3).left == 0);
  CHECK(h.node(3).right == 1);
  CHECK(h.node(3).merge_cost == 0.5);
  CHECK(h.node(4).merge_cost == 13.5);

  const auto h2 = greedy_segment(testkit::gray_image(3, 1, {5, 0, 1}));
  CHECK(h2.node(3).left == 1);
  CHECK(h2.node(3).right == 2);
  CHECK(h2.node(3).merge_cost == 0.5);
  CHECK(h2.node(4).merge_cost == 13.5);

  // The far pair (0),(5) at the row ends is never merged directly.
  const auto h3 = greedy_segment(testkit::gray_image(3, 1, {0, 200, 0}));
  CHECK(h3.node(3).stats.n == 2);
  CHECK(h3.node(3).merge_cost == 20000.0);
}

TEST_CASE("greedy_segment of a constant image costs nothing") {
  ImageRaster img;
  img.width = 4;
  img.height = 3;
  img.channels = 3;
  img.samples.assign(36, 77);
  const auto h = greedy_segment(img);
  for (std::size_t id = h.leaf_count(); id < h.node_count(); ++id) CHECK(h.node(id).merge_cost == 0.0);
  for (const auto& row : error_curve(h, 12).rows) CHECK(row.error == 0.0);
  const auto r = segment_restructured(img);
  CHECK(testkit::clusters_of(r) == testkit::clusters_of(h));
  CHECK(is_convex(r, 0.0).convex);
}

TEST_CASE("greedy_segment cuts are 4-connected") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = testkit::random_image(rng, 3 + trial % 5, 2 + trial % 4, trial % 2 ? 3 : 1);
    const auto h = greedy_segment(img);
    for (std::size_t g = 1; g <= img.pixel_count(); ++g) {
      CHECK(testkit::labels_connected(img.shape(), testkit::pixel_labels(h, cut_at(h, g))));
    }
  }
}

TEST_CASE("greedy_segment always takes the cheapest adjacent pair") {
  std::mt19937_64 rng(42);
  const auto img = testkit::random_image(rng, 6, 5, 3);
  const auto h = greedy_segment(img);
  for (std::size_t g = img.pixel_count(); g > 1; --g) {
    const auto p = cut_at(h, g);
    const auto labels = testkit::pixel_labels(h, p);
    double cheapest = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < img.height; ++y) {
      for (std::size_t x = 0; x < img.width; ++x) {
        const std::size_t q = y * img.width + x;
        for (std::size_t r : {q + 1, q + img.width}) {
          if ((r == q + 1 && x + 1 == img.width) || r >= img.pixel_count()) continue;
          if (labels[q] == labels[r]) continue;
          cheapest = std::min(cheapest, merge_increment(h.node(labels[q]).stats, h.node(labels[r]).stats));
        }
      }
    }
    const NodeId next = h.merge_order()[img.pixel_count() - g];
    CHECK(h.node(next).merge_cost == cheapest);
  }
}

TEST_CASE("segment_restructured equals restructure of greedy_segment") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 12; ++trial) {
    const auto img = testkit::random_image(rng, 2 + trial % 6, 2 + trial % 5, trial % 2 ? 3 : 1, trial % 3 ? 255 : 3);
    check_identical(segment_restructured(img), restructure(greedy_segment(img)));
  }
}

TEST_CASE("segment_restructured is convex and keeps the leaves") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const auto img = testkit::random_image(rng, 8, 8, 3);
    const auto h = segment_restructured(img);
    CHECK(h.leaf_count() == 64);
    for (std::size_t i = 0; i < 64; ++i) CHECK(h.leaf_labels()[i] == static_cast<std::int64_t>(i));
    CHECK(is_convex(h, default_epsilon(h)).convex);
    const auto e = testkit::curve_errors(h);
    CHECK(testkit::convex_curve(e, 1e-9 * e.front()));
  }
}

TEST_CASE("restructured segmentation approximates at least as well on 8x8 images") {
  std::mt19937_64 rng(45);
  int trials_all_g = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = testkit::random_image(rng, 8, 8, 3);
    const auto conventional = error_curve(greedy_segment(img), 64);
    const auto restructured = error_curve(segment_restructured(img), 64);
    bool all = true;
    for (std::size_t g = 0; g < 64; ++g) {
      all = all && restructured.rows[g].sigma <= conventional.rows[g].sigma * (1 + 1e-12);
    }
    trials_all_g += all;
  }
  MESSAGE("trials with sigma no worse for every g: " << trials_all_g << "/20");
  CHECK(trials_all_g >= 19);
}
