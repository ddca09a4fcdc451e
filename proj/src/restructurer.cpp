#include "quasiseg/restructurer.hpp"

#include <unordered_set>

namespace quasiseg {

namespace {

// Rebuilds the internal nodes of `h` inside `forest`, with leaf ids shifted by
// `offset`. Returns the new root.
NodeId graft(Forest& forest, const Hierarchy& h, NodeId offset) {
  const auto n = static_cast<NodeId>(h.leaf_count());
  std::vector<NodeId> mapped(h.node_count(), kNoNode);
  for (NodeId i = 0; i < n; ++i) mapped[i] = i + offset;
  for (NodeId id : h.merge_order()) {
    const auto& node = h.node(id);
    mapped[id] = forest.join(mapped[node.left], mapped[node.right]);
  }
  return mapped[h.root()];
}

}  // namespace

Hierarchy combined_merge(const Hierarchy& a, const Hierarchy& b, double relative_epsilon,
                         CrushTrace* trace) {
  if (a.empty() || b.empty()) throw StructuralError("combined_merge of an empty hierarchy");
  if (a.channels() != b.channels()) throw StructuralError("combined_merge: channel count mismatch");
  std::unordered_set<std::int64_t> seen(a.leaf_labels().begin(), a.leaf_labels().end());
  for (std::int64_t label : b.leaf_labels()) {
    if (seen.contains(label)) throw StructuralError("combined_merge: overlapping leaf sets");
  }

  std::vector<ClusterStats> leaves;
  std::vector<std::int64_t> labels;
  leaves.reserve(a.leaf_count() + b.leaf_count());
  for (const auto* h : {&a, &b}) {
    for (std::size_t i = 0; i < h->leaf_count(); ++i) leaves.push_back(h->node(static_cast<NodeId>(i)).stats);
    labels.insert(labels.end(), h->leaf_labels().begin(), h->leaf_labels().end());
  }
  Forest forest(std::move(leaves), std::move(labels));
  const NodeId root_a = graft(forest, a, 0);
  const NodeId root_b = graft(forest, b, static_cast<NodeId>(a.leaf_count()));
  const double epsilon =
      relative_epsilon * cluster_error(merge_stats(a.node(a.root()).stats, b.node(b.root()).stats));
  const NodeId root = forest.combined_merge(root_a, root_b, epsilon, /*inputs_convex=*/false, trace);
  return forest.extract(root);
}

Hierarchy restructure(const Hierarchy& h, double relative_epsilon, CrushTrace* trace) {
  Forest forest = Forest::from_hierarchy(h);
  const NodeId root = forest.restructure(h.root(), default_epsilon(h, relative_epsilon), trace);
  return forest.extract(root);
}

}  // namespace quasiseg
