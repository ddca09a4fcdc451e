#ifndef QUASISEG_SEGMENTER_HPP
#define QUASISEG_SEGMENTER_HPP

#include <cstddef>
#include <vector>

#include "quasiseg/forest.hpp"
#include "quasiseg/hierarchy.hpp"
#include "quasiseg/image.hpp"

namespace quasiseg {

/// Region adjacency graph under 4-connectivity. Regions are hierarchy node
/// ids: pixels first, then one new id per contraction.
class AdjacencyGraph {
 public:
  explicit AdjacencyGraph(GridShape shape);

  GridShape shape() const { return shape_; }
  std::size_t region_count() const { return regions_; }
  std::size_t edge_count() const { return edges_; }
  bool contains(NodeId region) const;
  /// Live neighbours of a live region, ascending.
  const std::vector<NodeId>& neighbors(NodeId region) const { return adjacency_[region]; }
  std::vector<MergePair> edges() const;

  /// Replaces adjacent regions u and v by the new region w.
  void contract(NodeId u, NodeId v, NodeId w);

 private:
  GridShape shape_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<char> alive_;
  std::size_t regions_ = 0;
  std::size_t edges_ = 0;
};

AdjacencyGraph build_rag(const ImageRaster& image);

/// Conventional segmentation: repeatedly merge the adjacent pair of regions
/// with the smallest error increment (ties: smaller ids). The k-th merge
/// creates node N+k. The result is usually not convex.
Hierarchy greedy_segment(const ImageRaster& image);

/// Same region merges as greedy_segment, but every merge is a combined
/// merge, so each region carries a convex hierarchy and the final one is
/// convex. Clusters of its cuts need not be spatially connected.
Hierarchy segment_restructured(const ImageRaster& image, double relative_epsilon = 1e-9,
                               CrushTrace* trace = nullptr);

}  // namespace quasiseg

#endif  // QUASISEG_SEGMENTER_HPP
