#ifndef QUASISEG_WARD_HPP
#define QUASISEG_WARD_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "quasiseg/hierarchy.hpp"
#include "quasiseg/stats.hpp"

namespace quasiseg {

/// One step of a Ward merge sequence. Items are numbered 0..m-1 and the k-th
/// step creates cluster m+k.
struct WardMerge {
  std::size_t first = 0;
  std::size_t second = 0;
  double cost = 0.0;
};

/// Ward agglomeration of weighted clusters. The dendrogram comes from a
/// nearest-neighbor chain; the steps are then replayed in ascending cost,
/// equal costs ordered by (smaller id, larger id), children always before
/// parents.
std::vector<WardMerge> ward_merges(std::span<const ClusterStats> items);

/// Hierarchy whose leaves are `items` (leaf i labelled i).
Hierarchy ward_cluster(std::span<const ClusterStats> items);

}  // namespace quasiseg

#endif  // QUASISEG_WARD_HPP
