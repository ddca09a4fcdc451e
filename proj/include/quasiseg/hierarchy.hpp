#ifndef QUASISEG_HIERARCHY_HPP
#define QUASISEG_HIERARCHY_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "quasiseg/stats.hpp"

namespace quasiseg {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct MergePair {
  NodeId first = kNoNode;
  NodeId second = kNoNode;
  friend bool operator==(const MergePair&, const MergePair&) = default;
};

struct HierarchyNode {
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  NodeId parent = kNoNode;
  ClusterStats stats;
  /// Error increment paid when this node was formed; 0 for leaves.
  double merge_cost = 0.0;
  /// Position in the merge sequence, 1..N-1 for internal nodes, 0 for leaves.
  std::int32_t merge_rank = 0;

  bool is_leaf() const { return left == kNoNode; }
};

/// Full binary merge tree over N leaves stored as a flat array of 2N-1 nodes.
///
/// Leaves occupy ids [0, N). Each leaf carries an external label (the pixel or
/// item index it stands for); labels are distinct. Every cut of the tree is
/// recoverable from the merge ranks, so all N nested approximations share the
/// same O(N) storage.
class Hierarchy {
 public:
  Hierarchy() = default;

  /// Leaves get ids 0..N-1; the k-th merge (0-based) creates node N+k with
  /// merge rank k+1. Each pair must reference two distinct nodes that exist
  /// and have not been merged yet.
  static Hierarchy build_from_merges(std::vector<ClusterStats> leaf_stats,
                                     std::span<const MergePair> merges,
                                     std::vector<std::int64_t> leaf_labels = {});

  /// Node N+i gets the children in `children[i]` and rank `ranks[i]`. Ranks
  /// must be a permutation of 1..N-1 in which every parent outranks its
  /// children. Internal stats and merge costs are recomputed from the leaves.
  static Hierarchy assemble(std::vector<ClusterStats> leaf_stats,
                            std::span<const MergePair> children,
                            std::span<const std::int32_t> ranks,
                            std::vector<std::int64_t> leaf_labels = {});

  std::size_t leaf_count() const { return labels_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  NodeId root() const { return root_; }
  int channels() const;

  const HierarchyNode& node(NodeId id) const;
  std::span<const HierarchyNode> nodes() const { return nodes_; }
  std::span<const std::int64_t> leaf_labels() const { return labels_; }
  bool is_leaf(NodeId id) const { return node(id).is_leaf(); }

  /// Internal node ids ordered by merge rank.
  std::vector<NodeId> merge_order() const;
  /// Leaf ids covered by `id`, in left-to-right order.
  std::vector<NodeId> leaves_under(NodeId id) const;

  /// Same tree with new ranks (indexed by internal node id - N).
  Hierarchy with_ranks(std::span<const std::int32_t> ranks) const;

 private:
  std::vector<HierarchyNode> nodes_;
  std::vector<std::int64_t> labels_;
  NodeId root_ = kNoNode;
};

struct Division {
  NodeId first = kNoNode;
  NodeId second = kNoNode;
  /// Change of the approximation error, always <= 0.
  double drop = 0.0;
};

/// Splits an internal node into its stored children. The hierarchy is not
/// touched; merging the two children again reproduces the node exactly.
Division divide(const Hierarchy& h, NodeId node);

struct Partition {
  /// Owning cluster per leaf id (pixel index for image hierarchies).
  std::vector<NodeId> labels;
  std::size_t g = 0;
  double total_error = 0.0;
  /// Distinct cluster ids in ascending order.
  std::vector<NodeId> clusters;
};

/// Approximation with g clusters: the state after the first N-g merges in
/// merge-rank order.
Partition cut_at(const Hierarchy& h, std::size_t g);

struct CurveRow {
  std::size_t g = 0;
  double error = 0.0;
  double sigma = 0.0;
};

struct ErrorCurve {
  std::vector<CurveRow> rows;
};

/// E_g and sigma_g for g = 1..g_max, obtained by telescoping merge costs.
ErrorCurve error_curve(const Hierarchy& h, std::size_t g_max);

struct ConvexityReport {
  bool convex = true;
  /// Internal nodes whose merge cost exceeds their parent's by more than
  /// epsilon.
  std::vector<NodeId> violations;
};

ConvexityReport is_convex(const Hierarchy& h, double epsilon);

/// Absolute tolerance relative to the error of the single-cluster
/// approximation.
double default_epsilon(const Hierarchy& h, double relative = 1e-9);

/// Re-ranks internal nodes by ascending merge cost (ties: smaller id first)
/// while keeping every child ranked before its parent. Topology and stats are
/// unchanged. Throws std::domain_error when `h` is not convex within epsilon.
Hierarchy canonicalize(const Hierarchy& h, double epsilon);

/// True when 2 E_g <= E_{g-1} + E_{g+1} + epsilon for every interior g.
bool is_convex_sequence(std::span<const double> errors, double epsilon);

}  // namespace quasiseg

#endif  // QUASISEG_HIERARCHY_HPP
