#include "quasiseg/hierarchy.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_set>

namespace quasiseg {

namespace {

std::vector<std::int64_t> identity_labels(std::size_t n) {
  std::vector<std::int64_t> labels(n);
  std::iota(labels.begin(), labels.end(), std::int64_t{0});
  return labels;
}

// Kahn-style topological order of internal nodes that always emits the
// available node with the smallest (cost, id).
std::vector<NodeId> order_by_cost(const Hierarchy& h) {
  const auto nodes = h.nodes();
  const std::size_t n = h.leaf_count();
  using Key = std::tuple<double, NodeId>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  std::vector<int> pending(nodes.size(), 0);
  for (std::size_t id = n; id < nodes.size(); ++id) {
    const auto& node = nodes[id];
    pending[id] = (nodes[node.left].is_leaf() ? 0 : 1) + (nodes[node.right].is_leaf() ? 0 : 1);
    if (pending[id] == 0) ready.emplace(node.merge_cost, static_cast<NodeId>(id));
  }
  std::vector<NodeId> order;
  order.reserve(n > 0 ? n - 1 : 0);
  while (!ready.empty()) {
    const NodeId id = std::get<1>(ready.top());
    ready.pop();
    order.push_back(id);
    const NodeId parent = nodes[id].parent;
    if (parent != kNoNode && --pending[parent] == 0) {
      ready.emplace(nodes[parent].merge_cost, parent);
    }
  }
  return order;
}

}  // namespace

Hierarchy Hierarchy::assemble(std::vector<ClusterStats> leaf_stats,
                              std::span<const MergePair> children,
                              std::span<const std::int32_t> ranks,
                              std::vector<std::int64_t> leaf_labels) {
  const std::size_t n = leaf_stats.size();
  if (n == 0) throw StructuralError("hierarchy needs at least one leaf");
  if (children.size() != n - 1 || ranks.size() != n - 1) {
    throw StructuralError("expected " + std::to_string(n - 1) + " merges, got " +
                          std::to_string(children.size()));
  }
  if (leaf_labels.empty()) leaf_labels = identity_labels(n);
  if (leaf_labels.size() != n) throw StructuralError("leaf label count mismatch");
  {
    std::unordered_set<std::int64_t> seen(leaf_labels.begin(), leaf_labels.end());
    if (seen.size() != n) throw StructuralError("leaf labels are not distinct");
  }

  Hierarchy h;
  h.labels_ = std::move(leaf_labels);
  h.nodes_.resize(2 * n - 1);
  int channels = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (leaf_stats[i].n <= 0) throw StructuralError("leaf " + std::to_string(i) + " is empty");
    if (channels == 0) channels = leaf_stats[i].channels;
    if (leaf_stats[i].channels != channels) throw StructuralError("leaves with mixed channel counts");
    h.nodes_[i].stats = leaf_stats[i];
  }

  const auto total = static_cast<NodeId>(h.nodes_.size());
  std::vector<NodeId> by_rank(n, kNoNode);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto id = static_cast<NodeId>(n + i);
    const auto [a, b] = children[i];
    if (a < 0 || a >= total || b < 0 || b >= total || a == b || a == id || b == id) {
      throw StructuralError("node " + std::to_string(id) + " has invalid children");
    }
    for (NodeId child : {a, b}) {
      if (h.nodes_[child].parent != kNoNode) {
        throw StructuralError("node " + std::to_string(child) + " has two parents");
      }
      h.nodes_[child].parent = id;
    }
    auto& node = h.nodes_[id];
    node.left = a;
    node.right = b;
    const std::int32_t rank = ranks[i];
    if (rank < 1 || static_cast<std::size_t>(rank) >= n || by_rank[rank] != kNoNode) {
      throw StructuralError("merge ranks are not a permutation of 1..N-1");
    }
    node.merge_rank = rank;
    by_rank[rank] = id;
  }

  for (std::size_t rank = 1; rank < n; ++rank) {
    auto& node = h.nodes_[by_rank[rank]];
    for (NodeId child : {node.left, node.right}) {
      const auto& c = h.nodes_[child];
      if (!c.is_leaf() && c.merge_rank >= node.merge_rank) {
        throw StructuralError("merge rank of node " + std::to_string(by_rank[rank]) +
                              " does not exceed its children's");
      }
    }
    const auto& l = h.nodes_[node.left].stats;
    const auto& r = h.nodes_[node.right].stats;
    node.stats = merge_stats(l, r);
    node.merge_cost = merge_increment(l, r);
  }

  for (NodeId id = 0; id < total; ++id) {
    if (h.nodes_[id].parent == kNoNode) {
      h.root_ = id;
      break;
    }
  }
  return h;
}

Hierarchy Hierarchy::build_from_merges(std::vector<ClusterStats> leaf_stats,
                                       std::span<const MergePair> merges,
                                       std::vector<std::int64_t> leaf_labels) {
  const std::size_t n = leaf_stats.size();
  if (n == 0) throw StructuralError("hierarchy needs at least one leaf");
  if (merges.size() != n - 1) {
    throw StructuralError("expected " + std::to_string(n - 1) + " merges, got " +
                          std::to_string(merges.size()));
  }
  std::vector<bool> merged(2 * n - 1, false);
  std::vector<std::int32_t> ranks(n - 1);
  for (std::size_t k = 0; k < merges.size(); ++k) {
    const auto limit = static_cast<NodeId>(n + k);
    for (NodeId id : {merges[k].first, merges[k].second}) {
      if (id < 0 || id >= limit) {
        throw StructuralError("merge " + std::to_string(k) + " references unknown node " +
                              std::to_string(id));
      }
      if (merged[id]) {
        throw StructuralError("merge " + std::to_string(k) + " references already merged node " +
                              std::to_string(id));
      }
    }
    if (merges[k].first == merges[k].second) throw StructuralError("self merge");
    merged[merges[k].first] = merged[merges[k].second] = true;
    ranks[k] = static_cast<std::int32_t>(k + 1);
  }
  return assemble(std::move(leaf_stats), merges, ranks, std::move(leaf_labels));
}

int Hierarchy::channels() const { return nodes_.empty() ? 0 : nodes_[root_].stats.channels; }

const HierarchyNode& Hierarchy::node(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw std::out_of_range("node id " + std::to_string(id) + " out of range");
  }
  return nodes_[id];
}

std::vector<NodeId> Hierarchy::merge_order() const {
  const std::size_t n = leaf_count();
  std::vector<NodeId> order(n > 0 ? n - 1 : 0);
  for (std::size_t id = n; id < nodes_.size(); ++id) order[nodes_[id].merge_rank - 1] = static_cast<NodeId>(id);
  return order;
}

std::vector<NodeId> Hierarchy::leaves_under(NodeId id) const {
  std::vector<NodeId> leaves;
  std::vector<NodeId> stack{id};
  node(id);
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    const auto& nd = nodes_[cur];
    if (nd.is_leaf()) {
      leaves.push_back(cur);
    } else {
      stack.push_back(nd.right);
      stack.push_back(nd.left);
    }
  }
  return leaves;
}

Hierarchy Hierarchy::with_ranks(std::span<const std::int32_t> ranks) const {
  const std::size_t n = leaf_count();
  std::vector<ClusterStats> leaves(n);
  for (std::size_t i = 0; i < n; ++i) leaves[i] = nodes_[i].stats;
  std::vector<MergePair> children(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) children[i] = {nodes_[n + i].left, nodes_[n + i].right};
  return assemble(std::move(leaves), children, ranks, labels_);
}

Division divide(const Hierarchy& h, NodeId id) {
  const auto& node = h.node(id);
  if (node.is_leaf()) throw std::domain_error("cannot divide leaf " + std::to_string(id));
  return {node.left, node.right, -node.merge_cost};
}

Partition cut_at(const Hierarchy& h, std::size_t g) {
  const std::size_t n = h.leaf_count();
  if (g < 1 || g > n) {
    throw std::out_of_range("cluster count " + std::to_string(g) + " outside 1.." + std::to_string(n));
  }
  const auto formed_rank = static_cast<std::int32_t>(n - g);
  const auto nodes = h.nodes();

  Partition p;
  p.g = g;
  p.labels.assign(n, kNoNode);
  std::vector<NodeId> stack{h.root()};
  std::vector<NodeId> inner;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const auto& node = nodes[id];
    if (node.is_leaf() || node.merge_rank <= formed_rank) {
      p.clusters.push_back(id);
      p.total_error += cluster_error(node.stats);
      inner.push_back(id);
      while (!inner.empty()) {
        const NodeId cur = inner.back();
        inner.pop_back();
        if (nodes[cur].is_leaf()) {
          p.labels[cur] = id;
        } else {
          inner.push_back(nodes[cur].left);
          inner.push_back(nodes[cur].right);
        }
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(p.clusters.begin(), p.clusters.end());
  return p;
}

ErrorCurve error_curve(const Hierarchy& h, std::size_t g_max) {
  const std::size_t n = h.leaf_count();
  if (g_max < 1 || g_max > n) {
    throw std::out_of_range("g_max " + std::to_string(g_max) + " outside 1.." + std::to_string(n));
  }
  const auto order = h.merge_order();
  // errors[g] for g = 1..n; E_n = 0 and E_g = E_{g+1} + cost(rank n-g).
  std::vector<double> errors(n + 1, 0.0);
  for (std::size_t g = n - 1; g >= 1; --g) {
    errors[g] = errors[g + 1] + h.node(order[n - g - 1]).merge_cost;
  }
  const auto& root = h.node(h.root()).stats;
  ErrorCurve curve;
  curve.rows.reserve(g_max);
  for (std::size_t g = 1; g <= g_max; ++g) {
    curve.rows.push_back({g, errors[g], sigma_from_error(errors[g], root.n, root.channels)});
  }
  return curve;
}

ConvexityReport is_convex(const Hierarchy& h, double epsilon) {
  if (epsilon < 0.0) throw std::domain_error("negative convexity tolerance");
  ConvexityReport report;
  const auto nodes = h.nodes();
  for (std::size_t id = h.leaf_count(); id < nodes.size(); ++id) {
    const auto& node = nodes[id];
    for (NodeId child : {node.left, node.right}) {
      const auto& c = nodes[child];
      if (!c.is_leaf() && c.merge_cost > node.merge_cost + epsilon) report.violations.push_back(child);
    }
  }
  std::sort(report.violations.begin(), report.violations.end());
  report.convex = report.violations.empty();
  return report;
}

double default_epsilon(const Hierarchy& h, double relative) {
  if (h.empty()) return 0.0;
  return relative * cluster_error(h.node(h.root()).stats);
}

Hierarchy canonicalize(const Hierarchy& h, double epsilon) {
  if (!is_convex(h, epsilon).convex) throw std::domain_error("canonicalize needs a convex hierarchy");
  const std::size_t n = h.leaf_count();
  std::vector<std::int32_t> ranks(n - 1);
  std::int32_t rank = 0;
  for (NodeId id : order_by_cost(h)) ranks[id - n] = ++rank;
  return h.with_ranks(ranks);
}

bool is_convex_sequence(std::span<const double> errors, double epsilon) {
  for (std::size_t i = 1; i + 1 < errors.size(); ++i) {
    if (2.0 * errors[i] > errors[i - 1] + errors[i + 1] + epsilon) return false;
  }
  return true;
}

}  // namespace quasiseg
