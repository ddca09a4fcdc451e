#include "quasiseg/segmenter.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <tuple>

namespace quasiseg {

namespace {

void erase_sorted(std::vector<NodeId>& v, NodeId x) {
  const auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

// Drives the adjacency-constrained greedy merge and reports each merge as
// (smaller region id, larger region id, new region id).
void merge_adjacent(const ImageRaster& image,
                    const std::function<void(NodeId, NodeId, NodeId)>& on_merge) {
  AdjacencyGraph graph = build_rag(image);
  const std::size_t n = image.pixel_count();
  std::vector<ClusterStats> stats = image.pixel_stats();
  stats.resize(2 * n - 1);

  using Entry = std::tuple<double, NodeId, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (const auto& [u, v] : graph.edges()) queue.emplace(merge_increment(stats[u], stats[v]), u, v);

  auto next = static_cast<NodeId>(n);
  while (graph.region_count() > 1) {
    const auto [cost, u, v] = queue.top();
    queue.pop();
    // Entries whose endpoints are both still live carry the current cost.
    if (!graph.contains(u) || !graph.contains(v)) continue;
    const NodeId w = next++;
    stats[w] = merge_stats(stats[u], stats[v]);
    graph.contract(u, v, w);
    on_merge(u, v, w);
    for (NodeId x : graph.neighbors(w)) queue.emplace(merge_increment(stats[x], stats[w]), x, w);
  }
}

}  // namespace

AdjacencyGraph::AdjacencyGraph(GridShape shape) : shape_(shape) {
  const std::size_t n = shape.size();
  if (n == 0) throw StructuralError("adjacency graph of an empty raster");
  adjacency_.resize(2 * n - 1);
  alive_.assign(2 * n - 1, 0);
  for (std::size_t y = 0; y < shape.height; ++y) {
    for (std::size_t x = 0; x < shape.width; ++x) {
      const auto id = static_cast<NodeId>(y * shape.width + x);
      auto& adj = adjacency_[id];
      if (y > 0) adj.push_back(id - static_cast<NodeId>(shape.width));
      if (x > 0) adj.push_back(id - 1);
      if (x + 1 < shape.width) adj.push_back(id + 1);
      if (y + 1 < shape.height) adj.push_back(id + static_cast<NodeId>(shape.width));
      edges_ += adj.size();
      alive_[id] = 1;
    }
  }
  edges_ /= 2;
  regions_ = n;
}

bool AdjacencyGraph::contains(NodeId region) const {
  return region >= 0 && static_cast<std::size_t>(region) < alive_.size() && alive_[region] != 0;
}

std::vector<MergePair> AdjacencyGraph::edges() const {
  std::vector<MergePair> out;
  out.reserve(edges_);
  for (std::size_t u = 0; u < adjacency_.size(); ++u) {
    if (!alive_[u]) continue;
    for (NodeId v : adjacency_[u]) {
      if (static_cast<NodeId>(u) < v) out.push_back({static_cast<NodeId>(u), v});
    }
  }
  return out;
}

void AdjacencyGraph::contract(NodeId u, NodeId v, NodeId w) {
  if (!contains(u) || !contains(v) || u == v || w < 0 ||
      static_cast<std::size_t>(w) >= alive_.size() || alive_[w] != 0) {
    throw std::logic_error("invalid region contraction");
  }
  auto& au = adjacency_[u];
  auto& av = adjacency_[v];
  if (!std::binary_search(au.begin(), au.end(), v)) throw std::logic_error("contracting non-adjacent regions");

  std::vector<NodeId> merged;
  merged.reserve(au.size() + av.size());
  std::set_union(au.begin(), au.end(), av.begin(), av.end(), std::back_inserter(merged));
  erase_sorted(merged, u);
  erase_sorted(merged, v);
  // Edges u-v, u-x and v-x collapse into w-x.
  edges_ -= au.size() + av.size() - 1;
  edges_ += merged.size();
  for (NodeId x : merged) {
    auto& ax = adjacency_[x];
    erase_sorted(ax, u);
    erase_sorted(ax, v);
    ax.push_back(w);  // w is the largest live id, so ax stays sorted.
  }
  adjacency_[w] = std::move(merged);
  au.clear();
  au.shrink_to_fit();
  av.clear();
  av.shrink_to_fit();
  alive_[u] = alive_[v] = 0;
  alive_[w] = 1;
  --regions_;
}

AdjacencyGraph build_rag(const ImageRaster& image) { return AdjacencyGraph(image.shape()); }

Hierarchy greedy_segment(const ImageRaster& image) {
  std::vector<MergePair> merges;
  merges.reserve(image.pixel_count());
  merge_adjacent(image, [&](NodeId u, NodeId v, NodeId) { merges.push_back({u, v}); });
  return Hierarchy::build_from_merges(image.pixel_stats(), merges);
}

Hierarchy segment_restructured(const ImageRaster& image, double relative_epsilon, CrushTrace* trace) {
  const std::size_t n = image.pixel_count();
  Forest forest(image.pixel_stats());
  ClusterStats whole;
  for (std::size_t i = 0; i < n; ++i) whole = merge_stats(whole, forest.node(static_cast<NodeId>(i)).stats);
  const double epsilon = relative_epsilon * cluster_error(whole);

  // Region id (as in greedy_segment) -> root of its convex hierarchy.
  std::vector<NodeId> root(2 * n - 1, kNoNode);
  for (std::size_t i = 0; i < n; ++i) root[i] = static_cast<NodeId>(i);
  merge_adjacent(image, [&](NodeId u, NodeId v, NodeId w) {
    root[w] = forest.combined_merge(root[u], root[v], epsilon, /*inputs_convex=*/true, trace);
  });
  return forest.extract(root[2 * n - 2]);
}

}  // namespace quasiseg
