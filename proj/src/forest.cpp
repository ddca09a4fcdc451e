#include "quasiseg/forest.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>

#include "quasiseg/ward.hpp"

namespace quasiseg {

Forest::Forest(std::vector<ClusterStats> leaf_stats, std::vector<std::int64_t> leaf_labels)
    : labels_(std::move(leaf_labels)) {
  if (labels_.empty()) {
    labels_.resize(leaf_stats.size());
    std::iota(labels_.begin(), labels_.end(), std::int64_t{0});
  }
  if (labels_.size() != leaf_stats.size()) throw StructuralError("leaf label count mismatch");
  nodes_.resize(leaf_stats.size());
  for (std::size_t i = 0; i < leaf_stats.size(); ++i) {
    auto& node = nodes_[i];
    node.stats = leaf_stats[i];
    node.min_label = labels_[i];
    node.alive = true;
  }
}

Forest Forest::from_hierarchy(const Hierarchy& h) {
  const std::size_t n = h.leaf_count();
  std::vector<ClusterStats> leaves(n);
  for (std::size_t i = 0; i < n; ++i) leaves[i] = h.node(static_cast<NodeId>(i)).stats;
  Forest f(std::move(leaves), {h.leaf_labels().begin(), h.leaf_labels().end()});
  f.nodes_.resize(h.node_count());
  for (NodeId id : h.merge_order()) {
    const auto& src = h.node(id);
    auto& dst = f.nodes_[id];
    dst.left = src.left;
    dst.right = src.right;
    dst.stats = src.stats;
    dst.cost = src.merge_cost;
    dst.min_label = std::min(f.nodes_[src.left].min_label, f.nodes_[src.right].min_label);
    dst.alive = true;
    f.nodes_[src.left].parent = id;
    f.nodes_[src.right].parent = id;
  }
  return f;
}

NodeId Forest::allocate() {
  if (!free_.empty()) {
    const NodeId id = free_.back();
    free_.pop_back();
    return id;
  }
  nodes_.emplace_back();
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Forest::release(NodeId id) {
  nodes_[id] = ForestNode{};
  free_.push_back(id);
}

NodeId Forest::join(NodeId a, NodeId b) {
  if (a == b || !nodes_[a].alive || !nodes_[b].alive || nodes_[a].parent != kNoNode ||
      nodes_[b].parent != kNoNode) {
    throw std::logic_error("join expects two distinct live roots");
  }
  const NodeId id = allocate();
  auto& node = nodes_[id];
  const auto& l = nodes_[a];
  const auto& r = nodes_[b];
  node.left = a;
  node.right = b;
  node.stats = merge_stats(l.stats, r.stats);
  node.cost = merge_increment(l.stats, r.stats);
  node.min_label = std::min(l.min_label, r.min_label);
  node.alive = true;
  nodes_[a].parent = id;
  nodes_[b].parent = id;
  return id;
}

std::pair<NodeId, NodeId> Forest::divide(NodeId id) {
  auto& node = nodes_[id];
  if (!node.alive || node.is_leaf() || node.parent != kNoNode) {
    throw std::logic_error("divide expects an internal root");
  }
  const std::pair<NodeId, NodeId> halves{node.left, node.right};
  nodes_[halves.first].parent = kNoNode;
  nodes_[halves.second].parent = kNoNode;
  release(id);
  return halves;
}

NodeId Forest::ward(std::span<const NodeId> roots) {
  if (roots.size() == 1) return roots.front();
  return ward_build(roots).back();
}

std::vector<NodeId> Forest::ward_build(std::span<const NodeId> roots) {
  std::vector<ClusterStats> items;
  items.reserve(roots.size());
  for (NodeId r : roots) items.push_back(nodes_[r].stats);
  std::vector<NodeId> ids(roots.begin(), roots.end());
  std::vector<NodeId> created;
  created.reserve(roots.size() - 1);
  for (const auto& step : ward_merges(items)) {
    created.push_back(join(ids[step.first], ids[step.second]));
    ids.push_back(created.back());
  }
  return created;
}

NodeId Forest::combined_merge(NodeId a, NodeId b, double epsilon, bool inputs_convex,
                              CrushTrace* trace) {
  const NodeId top = join(a, b);
  std::size_t rounds = 0;
  std::size_t crushed = 0;
  auto finish = [&](NodeId root) {
    if (trace != nullptr) {
      ++trace->combined_merges;
      trace->iterations += rounds;
      trace->crushed_nodes += crushed;
      if (rounds > trace->max_iterations) {
        trace->max_iterations = rounds;
        trace->leaves_at_max = size_under(root);
      }
    }
    return root;
  };

  // First crush: every violating child and all of its ancestors go; the
  // maximal untouched subtrees form the frontier.
  std::vector<NodeId> frontier;
  {
    std::vector<char> marked(nodes_.size(), 0);
    auto mark_upwards = [&](NodeId id) {
      while (id != kNoNode) {
        if (marked[id]) break;
        marked[id] = 1;
        id = nodes_[id].parent;
      }
    };
    bool any = false;
    const auto scan = inputs_convex ? std::vector<NodeId>{top} : internal_postorder(top);
    for (NodeId x : scan) {
      for (NodeId c : {nodes_[x].left, nodes_[x].right}) {
        if (internal(c) && nodes_[c].cost > nodes_[x].cost + epsilon) {
          mark_upwards(c);
          any = true;
        }
      }
    }
    if (!any) return finish(top);
    ++rounds;
    std::vector<NodeId> stack{top};
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      if (marked[x]) {
        stack.push_back(nodes_[x].left);
        stack.push_back(nodes_[x].right);
        release(x);
        ++crushed;
      } else {
        nodes_[x].parent = kNoNode;
        frontier.push_back(x);
      }
    }
  }

  auto by_label = [this](NodeId x, NodeId y) { return nodes_[x].min_label < nodes_[y].min_label; };
  for (;;) {
    std::sort(frontier.begin(), frontier.end(), by_label);
    const auto upper = ward_build(frontier);
    const NodeId root = upper.back();
    std::vector<NodeId> violating;
    for (NodeId f : frontier) {
      const NodeId p = nodes_[f].parent;
      if (internal(f) && nodes_[f].cost > nodes_[p].cost + epsilon) violating.push_back(f);
    }
    if (violating.empty()) return finish(root);
    ++rounds;

    // Discard the whole upper structure, then crush the violating roots.
    for (NodeId f : frontier) nodes_[f].parent = kNoNode;
    for (NodeId x : upper) release(x);
    for (NodeId v : violating) {
      const auto [l, r] = divide(v);
      ++crushed;
      std::erase(frontier, v);
      frontier.push_back(l);
      frontier.push_back(r);
    }
  }
}

NodeId Forest::restructure(NodeId root, double epsilon, CrushTrace* trace) {
  const auto order = internal_postorder(root);
  if (order.empty()) return root;
  std::vector<NodeId> replaced(nodes_.size(), kNoNode);
  auto resolve = [&](NodeId c) { return replaced[c] != kNoNode ? replaced[c] : c; };
  for (NodeId x : order) {
    const NodeId l = resolve(nodes_[x].left);
    const NodeId r = resolve(nodes_[x].right);
    release(x);
    nodes_[l].parent = kNoNode;
    nodes_[r].parent = kNoNode;
    replaced[x] = combined_merge(l, r, epsilon, /*inputs_convex=*/true, trace);
  }
  return replaced[root];
}

std::vector<NodeId> Forest::leaves_under(NodeId id) const {
  std::vector<NodeId> leaves;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId x = stack.back();
    stack.pop_back();
    if (nodes_[x].is_leaf()) {
      leaves.push_back(x);
    } else {
      stack.push_back(nodes_[x].right);
      stack.push_back(nodes_[x].left);
    }
  }
  return leaves;
}

std::vector<NodeId> Forest::internal_postorder(NodeId id) const {
  std::vector<NodeId> order;
  std::vector<std::pair<NodeId, bool>> stack{{id, false}};
  while (!stack.empty()) {
    auto [x, expanded] = stack.back();
    stack.pop_back();
    if (nodes_[x].is_leaf()) continue;
    if (expanded) {
      order.push_back(x);
    } else {
      stack.emplace_back(x, true);
      stack.emplace_back(nodes_[x].right, false);
      stack.emplace_back(nodes_[x].left, false);
    }
  }
  return order;
}

Hierarchy Forest::extract(NodeId root, const std::function<int(NodeId)>& tier) const {
  auto leaves = leaves_under(root);
  std::sort(leaves.begin(), leaves.end());
  const std::size_t n = leaves.size();
  std::vector<NodeId> new_id(nodes_.size(), kNoNode);
  std::vector<ClusterStats> leaf_stats(n);
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    new_id[leaves[i]] = static_cast<NodeId>(i);
    leaf_stats[i] = nodes_[leaves[i]].stats;
    labels[i] = labels_[leaves[i]];
  }

  const auto internals = internal_postorder(root);
  using Key = std::tuple<int, double, std::int64_t, NodeId>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  std::vector<int> pending(nodes_.size(), 0);
  auto key = [&](NodeId x) {
    return Key{tier ? tier(x) : 0, nodes_[x].cost, nodes_[x].min_label, x};
  };
  for (NodeId x : internals) {
    pending[x] = (internal(nodes_[x].left) ? 1 : 0) + (internal(nodes_[x].right) ? 1 : 0);
    if (pending[x] == 0) ready.push(key(x));
  }
  std::vector<MergePair> children(n > 0 ? n - 1 : 0);
  std::vector<std::int32_t> ranks(children.size());
  std::int32_t rank = 0;
  while (!ready.empty()) {
    const NodeId x = std::get<3>(ready.top());
    ready.pop();
    ++rank;
    const auto slot = static_cast<std::size_t>(rank - 1);
    new_id[x] = static_cast<NodeId>(n + slot);
    children[slot] = {new_id[nodes_[x].left], new_id[nodes_[x].right]};
    ranks[slot] = rank;
    if (x != root) {
      const NodeId p = nodes_[x].parent;
      if (--pending[p] == 0) ready.push(key(p));
    }
  }
  return Hierarchy::assemble(std::move(leaf_stats), children, ranks, std::move(labels));
}

}  // namespace quasiseg
