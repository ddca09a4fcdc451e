#ifndef QUASISEG_ORACLE_HPP
#define QUASISEG_ORACLE_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "quasiseg/hierarchy.hpp"
#include "quasiseg/image.hpp"
#include "quasiseg/stats.hpp"

namespace quasiseg {

/// Largest instance the exhaustive search accepts (Bell(12) = 4213597).
inline constexpr std::size_t kOracleCapacity = 12;

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct OptimalPartition {
  /// Block index per item, as a restricted growth string (first item in
  /// block 0, each new block numbered one past the largest so far).
  std::vector<int> assignment;
  double error = 0.0;
};

/// Exact minimum-error partition of `items` into exactly g blocks by
/// enumerating set partitions. Among equal errors the lexicographically
/// smallest assignment wins.
OptimalPartition optimal_partition(std::span<const ClusterStats> items, std::size_t g);

/// Same, restricted to partitions of the raster into g 4-connected regions.
OptimalPartition optimal_connected_partition(const ImageRaster& image, std::size_t g);

/// E_opt(g) for g = 1..g_max.
ErrorCurve optimal_curve(std::span<const ClusterStats> items, std::size_t g_max);
ErrorCurve optimal_connected_curve(const ImageRaster& image, std::size_t g_max);

}  // namespace quasiseg

#endif  // QUASISEG_ORACLE_HPP
