#ifndef QUASISEG_ASI_HPP
#define QUASISEG_ASI_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "quasiseg/hierarchy.hpp"
#include "quasiseg/image.hpp"

namespace quasiseg {

enum class AsiMode {
  kClustering,    ///< any pair of clusters may merge
  kSegmentation,  ///< only clusters sharing a 4-adjacent pixel pair may merge
};

struct SplitChoice {
  NodeId cluster = kNoNode;
  /// |ΔE_divide| of the cluster's stored dichotomy; 0 for single pixels.
  double drop = 0.0;
};

struct MergeChoice {
  NodeId first = kNoNode;
  NodeId second = kNoNode;
  double increment = 0.0;
};

/// Cluster of `p` whose stored split lowers the error most (ties: smaller id).
SplitChoice best_split(const Partition& p, const Hierarchy& h);

/// Cheapest merge among the clusters of `p` (ties: smaller (first, second)).
/// Segmentation mode needs the grid; leaf labels of `h` are pixel indices.
MergeChoice best_merge(const Partition& p, const Hierarchy& h, AsiMode mode,
                       const std::optional<GridShape>& grid = std::nullopt);

struct AsiOptions {
  AsiMode mode = AsiMode::kClustering;
  std::optional<GridShape> grid;
  double relative_epsilon = 1e-9;
  /// 0 means no limit.
  std::size_t max_rounds = 0;
};

struct AsiResult {
  Hierarchy hierarchy;
  Partition partition;
  std::size_t rounds = 0;
  /// Total error before the first round and after each round.
  std::vector<double> errors;
  /// min merge increment >= max split drop - epsilon at exit.
  bool criterion_met = false;
  double min_increment = 0.0;
  double max_drop = 0.0;
  double epsilon = 0.0;
};

/// Improves the g-cluster cut of `h`: while some merge costs less than the
/// largest split gain, split that cluster, then combined-merge the cheapest
/// pair (which may include one of the halves). Each round lowers the total
/// error. cut_at(hierarchy, g) is the final partition. Every cluster is
/// convex inside and so is the Ward tree built above the clusters; the joints
/// between the two are convex too when the criterion holds in clustering
/// mode. In segmentation mode a non-adjacent pair can be cheaper than a
/// cluster's own split, and no tree with the partition as a cut avoids that
/// inversion.
AsiResult asi_improve(const Hierarchy& h, std::size_t g, const AsiOptions& options = {});

}  // namespace quasiseg

#endif  // QUASISEG_ASI_HPP
