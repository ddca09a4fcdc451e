#include "quasiseg/asi.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>

#include "quasiseg/forest.hpp"

namespace quasiseg {

namespace {

struct Candidate {
  std::int64_t key = 0;
  ClusterStats stats;
  double drop = 0.0;
};

using IndexPairs = std::vector<std::pair<std::size_t, std::size_t>>;

struct PairPick {
  bool found = false;
  std::size_t first = 0;
  std::size_t second = 0;
  double increment = std::numeric_limits<double>::infinity();
};

std::size_t pick_split(const std::vector<Candidate>& c) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i].drop > c[best].drop || (c[i].drop == c[best].drop && c[i].key < c[best].key)) best = i;
  }
  return best;
}

PairPick pick_merge(const std::vector<Candidate>& c, const std::optional<IndexPairs>& allowed) {
  PairPick best;
  auto consider = [&](std::size_t i, std::size_t j) {
    if (c[j].key < c[i].key) std::swap(i, j);
    const double inc = merge_increment(c[i].stats, c[j].stats);
    const bool better =
        !best.found || inc < best.increment ||
        (inc == best.increment &&
         std::pair(c[i].key, c[j].key) < std::pair(c[best.first].key, c[best.second].key));
    if (better) best = {true, i, j, inc};
  };
  if (allowed) {
    for (const auto& [i, j] : *allowed) consider(i, j);
  } else {
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) consider(i, j);
    }
  }
  return best;
}

// Pairs of cluster indices that share at least one 4-adjacent pixel pair.
IndexPairs adjacent_pairs(GridShape grid, const std::vector<std::size_t>& cluster_of_pixel) {
  IndexPairs pairs;
  auto add = [&](std::size_t p, std::size_t q) {
    const std::size_t a = cluster_of_pixel[p];
    const std::size_t b = cluster_of_pixel[q];
    if (a != b) pairs.emplace_back(std::min(a, b), std::max(a, b));
  };
  for (std::size_t y = 0; y < grid.height; ++y) {
    for (std::size_t x = 0; x < grid.width; ++x) {
      const std::size_t p = y * grid.width + x;
      if (x + 1 < grid.width) add(p, p + 1);
      if (y + 1 < grid.height) add(p, p + grid.width);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

void check_grid(const Hierarchy& h, const std::optional<GridShape>& grid) {
  if (!grid) throw std::invalid_argument("segmentation mode needs the raster shape");
  if (grid->size() != h.leaf_count()) {
    throw StructuralError("raster of " + std::to_string(grid->size()) + " pixels does not match " +
                          std::to_string(h.leaf_count()) + " leaves");
  }
  for (std::int64_t label : h.leaf_labels()) {
    if (label < 0 || static_cast<std::size_t>(label) >= grid->size()) {
      throw StructuralError("leaf label " + std::to_string(label) + " is not a pixel index");
    }
  }
}

std::vector<Candidate> candidates_of(const Partition& p, const Hierarchy& h) {
  std::vector<Candidate> c;
  c.reserve(p.clusters.size());
  for (NodeId id : p.clusters) {
    const auto& node = h.node(id);
    c.push_back({id, node.stats, node.merge_cost});
  }
  return c;
}

}  // namespace

SplitChoice best_split(const Partition& p, const Hierarchy& h) {
  if (p.clusters.empty()) throw std::invalid_argument("best_split of an empty partition");
  const auto c = candidates_of(p, h);
  const std::size_t i = pick_split(c);
  return {p.clusters[i], c[i].drop};
}

MergeChoice best_merge(const Partition& p, const Hierarchy& h, AsiMode mode,
                       const std::optional<GridShape>& grid) {
  if (p.clusters.size() < 2) throw std::invalid_argument("best_merge needs at least two clusters");
  const auto c = candidates_of(p, h);
  std::optional<IndexPairs> allowed;
  if (mode == AsiMode::kSegmentation) {
    check_grid(h, grid);
    std::vector<std::size_t> cluster_of_pixel(grid->size());
    for (std::size_t leaf = 0; leaf < h.leaf_count(); ++leaf) {
      const auto it = std::lower_bound(p.clusters.begin(), p.clusters.end(), p.labels[leaf]);
      cluster_of_pixel[h.leaf_labels()[leaf]] = static_cast<std::size_t>(it - p.clusters.begin());
    }
    allowed = adjacent_pairs(*grid, cluster_of_pixel);
  }
  const auto pick = pick_merge(c, allowed);
  if (!pick.found) throw std::invalid_argument("no admissible cluster pair");
  return {p.clusters[pick.first], p.clusters[pick.second], pick.increment};
}

AsiResult asi_improve(const Hierarchy& h, std::size_t g, const AsiOptions& options) {
  const std::size_t n = h.leaf_count();
  if (g < 1 || g > n) {
    throw std::out_of_range("cluster count " + std::to_string(g) + " outside 1.." + std::to_string(n));
  }
  const bool segmentation = options.mode == AsiMode::kSegmentation;
  if (segmentation) check_grid(h, options.grid);

  AsiResult result;
  result.epsilon = default_epsilon(h, options.relative_epsilon);
  const double eps = result.epsilon;

  // Detach the g clusters of the initial cut and make each one convex.
  Forest forest = Forest::from_hierarchy(h);
  const auto order = h.merge_order();
  for (std::size_t rank = n - 1; rank > n - g; --rank) forest.divide(order[rank - 1]);
  std::vector<NodeId> roots;
  for (NodeId c : cut_at(h, g).clusters) roots.push_back(forest.restructure(c, eps));

  auto total_error = [&] {
    double e = 0.0;
    for (NodeId r : roots) e += cluster_error(forest.node(r).stats);
    return e;
  };
  auto candidates = [&] {
    std::vector<Candidate> c;
    c.reserve(roots.size());
    for (NodeId r : roots) {
      const auto& node = forest.node(r);
      c.push_back({node.min_label, node.stats, node.is_leaf() ? 0.0 : node.cost});
    }
    return c;
  };
  auto admissible = [&]() -> std::optional<IndexPairs> {
    if (!segmentation) return std::nullopt;
    std::vector<std::size_t> cluster_of_pixel(n);
    for (std::size_t k = 0; k < roots.size(); ++k) {
      for (NodeId leaf : forest.leaves_under(roots[k])) cluster_of_pixel[forest.label(leaf)] = k;
    }
    return adjacent_pairs(*options.grid, cluster_of_pixel);
  };

  result.errors.push_back(total_error());
  for (;;) {
    if (roots.size() < 2) {
      result.criterion_met = true;
      break;
    }
    auto c = candidates();
    const std::size_t s = pick_split(c);
    const double drop = c[s].drop;
    const auto before = pick_merge(c, admissible());
    result.max_drop = drop;
    result.min_increment = before.increment;
    if (!before.found || before.increment >= drop - eps) {
      result.criterion_met = true;
      break;
    }
    if (options.max_rounds != 0 && result.rounds >= options.max_rounds) break;

    const NodeId split = roots[s];
    const auto [half_a, half_b] = forest.divide(split);
    roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(s));
    roots.push_back(half_a);
    roots.push_back(half_b);

    c = candidates();
    const auto pick = pick_merge(c, admissible());
    const NodeId x = roots[pick.first];
    const NodeId y = roots[pick.second];
    const bool rejoins_halves = (x == half_a && y == half_b) || (x == half_b && y == half_a);
    if (!pick.found || rejoins_halves || !(pick.increment < drop)) {
      // No strict improvement: restore the split cluster bit for bit and stop.
      roots.pop_back();
      roots.pop_back();
      roots.insert(roots.begin() + static_cast<std::ptrdiff_t>(s), forest.join(half_a, half_b));
      break;
    }
    const NodeId merged = forest.combined_merge(x, y, eps, /*inputs_convex=*/true);
    std::erase_if(roots, [&](NodeId r) { return r == x || r == y; });
    roots.push_back(merged);
    ++result.rounds;
    result.errors.push_back(total_error());
  }

  // Ward above the final clusters. In clustering mode the exit criterion puts
  // every upper cost above every cluster cost, so the whole tree is convex.
  std::sort(roots.begin(), roots.end(), [&](NodeId a, NodeId b) {
    return forest.node(a).min_label < forest.node(b).min_label;
  });
  const NodeId top = forest.ward(roots);
  std::unordered_set<NodeId> upper;
  {
    const std::unordered_set<NodeId> cluster_roots(roots.begin(), roots.end());
    std::vector<NodeId> stack{top};
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      if (cluster_roots.contains(x)) continue;
      upper.insert(x);
      stack.push_back(forest.node(x).left);
      stack.push_back(forest.node(x).right);
    }
  }
  result.hierarchy = forest.extract(top, [&](NodeId x) { return upper.contains(x) ? 1 : 0; });
  result.partition = cut_at(result.hierarchy, g);
  return result;
}

}  // namespace quasiseg
