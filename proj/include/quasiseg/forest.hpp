#ifndef QUASISEG_FOREST_HPP
#define QUASISEG_FOREST_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "quasiseg/hierarchy.hpp"
#include "quasiseg/stats.hpp"

namespace quasiseg {

struct ForestNode {
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  NodeId parent = kNoNode;
  ClusterStats stats;
  double cost = 0.0;
  /// Smallest leaf label below this node. Orders sibling subtrees
  /// independently of how ids were allocated.
  std::int64_t min_label = 0;
  bool alive = false;

  bool is_leaf() const { return left == kNoNode; }
};

/// Counters of the merge/restructure loop.
struct CrushTrace {
  std::size_t combined_merges = 0;
  /// Crush rounds over all combined merges.
  std::size_t iterations = 0;
  /// Largest number of crush rounds within one combined merge.
  std::size_t max_iterations = 0;
  /// Leaves under the combined merge that needed max_iterations rounds.
  std::size_t leaves_at_max = 0;
  std::size_t crushed_nodes = 0;
};

/// Mutable pool of binary trees over a fixed leaf set. Leaves keep ids
/// 0..N-1; internal ids are recycled as nodes are crushed and rebuilt. This is
/// the working representation behind segmentation, restructuring and ASI;
/// results leave it through extract().
class Forest {
 public:
  Forest(std::vector<ClusterStats> leaf_stats, std::vector<std::int64_t> leaf_labels = {});

  /// Copies `h` keeping its node ids; h.root() is a root of the forest.
  static Forest from_hierarchy(const Hierarchy& h);

  std::size_t leaf_count() const { return labels_.size(); }
  const ForestNode& node(NodeId id) const { return nodes_[id]; }
  std::int64_t label(NodeId leaf) const { return labels_[leaf]; }

  /// Plain merge of two roots.
  NodeId join(NodeId a, NodeId b);
  /// Removes an internal root; its children become roots.
  std::pair<NodeId, NodeId> divide(NodeId id);
  /// Ward agglomeration above the given roots. Returns the new root.
  NodeId ward(std::span<const NodeId> roots);

  /// Joins two roots and restructures the result until every internal node
  /// costs at least as much as its internal children (within epsilon).
  /// `inputs_convex` promises that both operands already satisfy this.
  NodeId combined_merge(NodeId a, NodeId b, double epsilon, bool inputs_convex,
                        CrushTrace* trace = nullptr);

  /// Bottom-up combined merges over the subtree of `root`.
  NodeId restructure(NodeId root, double epsilon, CrushTrace* trace = nullptr);

  std::vector<NodeId> leaves_under(NodeId id) const;
  std::size_t size_under(NodeId id) const { return static_cast<std::size_t>(nodes_[id].stats.n); }

  /// Internal ids of the subtree rooted at `id`, children before parents.
  std::vector<NodeId> internal_postorder(NodeId id) const;

  /// Compacts the tree under `root` into a Hierarchy. Leaves keep their
  /// relative id order; internal nodes are ranked by ascending (tier, cost,
  /// min_label) with children before parents, and numbered by rank.
  Hierarchy extract(NodeId root, const std::function<int(NodeId)>& tier = {}) const;

 private:
  NodeId allocate();
  /// Ward nodes above `roots` in creation order; the last one is the root.
  std::vector<NodeId> ward_build(std::span<const NodeId> roots);
  void release(NodeId id);
  bool internal(NodeId id) const { return !nodes_[id].is_leaf(); }

  std::vector<ForestNode> nodes_;
  std::vector<std::int64_t> labels_;
  std::vector<NodeId> free_;
};

}  // namespace quasiseg

#endif  // QUASISEG_FOREST_HPP
