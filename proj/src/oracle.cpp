#include "quasiseg/oracle.hpp"

#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace quasiseg {

namespace {

// Depth-first enumeration of restricted growth strings, i.e. every set
// partition exactly once, in lexicographic order.
class PartitionSearch {
 public:
  PartitionSearch(std::span<const ClusterStats> items, std::size_t lo, std::size_t hi,
                  std::optional<std::vector<std::uint32_t>> neighbors)
      : items_(items),
        lo_(lo),
        hi_(hi),
        neighbors_(std::move(neighbors)),
        assignment_(items.size(), 0),
        blocks_(items.size()),
        masks_(items.size(), 0),
        best_(hi + 1) {
    for (auto& b : best_) b.error = std::numeric_limits<double>::infinity();
  }

  const std::vector<OptimalPartition>& run() {
    descend(0, 0);
    return best_;
  }

 private:
  void descend(std::size_t i, std::size_t used) {
    const std::size_t n = items_.size();
    if (used + (n - i) < lo_) return;
    if (i == n) {
      evaluate(used);
      return;
    }
    const std::size_t limit = std::min(used + 1, hi_);
    for (std::size_t b = 0; b < limit; ++b) {
      assignment_[i] = static_cast<int>(b);
      const ClusterStats saved = blocks_[b];
      blocks_[b] = merge_stats(blocks_[b], items_[i]);
      masks_[b] |= std::uint32_t{1} << i;
      descend(i + 1, std::max(used, b + 1));
      masks_[b] &= ~(std::uint32_t{1} << i);
      blocks_[b] = saved;
    }
  }

  bool connected(std::uint32_t mask) const {
    std::uint32_t reach = mask & (~mask + 1);
    for (;;) {
      std::uint32_t grown = reach;
      for (std::uint32_t bits = reach; bits != 0; bits &= bits - 1) {
        grown |= (*neighbors_)[std::countr_zero(bits)] & mask;
      }
      if (grown == reach) return reach == mask;
      reach = grown;
    }
  }

  void evaluate(std::size_t used) {
    if (neighbors_) {
      for (std::size_t b = 0; b < used; ++b) {
        if (!connected(masks_[b])) return;
      }
    }
    double e = 0.0;
    for (std::size_t b = 0; b < used; ++b) e += cluster_error(blocks_[b]);
    if (e < best_[used].error) {
      best_[used].error = e;
      best_[used].assignment = assignment_;
    }
  }

  std::span<const ClusterStats> items_;
  std::size_t lo_;
  std::size_t hi_;
  std::optional<std::vector<std::uint32_t>> neighbors_;
  std::vector<int> assignment_;
  std::vector<ClusterStats> blocks_;
  std::vector<std::uint32_t> masks_;
  std::vector<OptimalPartition> best_;
};

void check_capacity(std::size_t n) {
  if (n == 0) throw std::invalid_argument("oracle needs at least one item");
  if (n > kOracleCapacity) {
    throw CapacityError("exhaustive search is limited to " + std::to_string(kOracleCapacity) +
                        " items, got " + std::to_string(n));
  }
}

void check_range(std::size_t g, std::size_t n) {
  if (g < 1 || g > n) {
    throw std::out_of_range("cluster count " + std::to_string(g) + " outside 1.." + std::to_string(n));
  }
}

std::vector<std::uint32_t> grid_neighbors(GridShape grid) {
  std::vector<std::uint32_t> nb(grid.size(), 0);
  for (std::size_t y = 0; y < grid.height; ++y) {
    for (std::size_t x = 0; x < grid.width; ++x) {
      const std::size_t p = y * grid.width + x;
      if (x > 0) nb[p] |= std::uint32_t{1} << (p - 1);
      if (x + 1 < grid.width) nb[p] |= std::uint32_t{1} << (p + 1);
      if (y > 0) nb[p] |= std::uint32_t{1} << (p - grid.width);
      if (y + 1 < grid.height) nb[p] |= std::uint32_t{1} << (p + grid.width);
    }
  }
  return nb;
}

ErrorCurve to_curve(const std::vector<OptimalPartition>& best, std::span<const ClusterStats> items,
                    std::size_t g_max) {
  ClusterStats pooled;
  for (const auto& s : items) pooled = merge_stats(pooled, s);
  ErrorCurve curve;
  for (std::size_t g = 1; g <= g_max; ++g) {
    curve.rows.push_back({g, best[g].error, sigma_from_error(best[g].error, pooled.n, pooled.channels)});
  }
  return curve;
}

}  // namespace

OptimalPartition optimal_partition(std::span<const ClusterStats> items, std::size_t g) {
  check_capacity(items.size());
  check_range(g, items.size());
  return PartitionSearch(items, g, g, std::nullopt).run()[g];
}

OptimalPartition optimal_connected_partition(const ImageRaster& image, std::size_t g) {
  check_capacity(image.pixel_count());
  check_range(g, image.pixel_count());
  const auto items = image.pixel_stats();
  return PartitionSearch(items, g, g, grid_neighbors(image.shape())).run()[g];
}

ErrorCurve optimal_curve(std::span<const ClusterStats> items, std::size_t g_max) {
  check_capacity(items.size());
  check_range(g_max, items.size());
  return to_curve(PartitionSearch(items, 1, g_max, std::nullopt).run(), items, g_max);
}

ErrorCurve optimal_connected_curve(const ImageRaster& image, std::size_t g_max) {
  check_capacity(image.pixel_count());
  check_range(g_max, image.pixel_count());
  const auto items = image.pixel_stats();
  return to_curve(PartitionSearch(items, 1, g_max, grid_neighbors(image.shape())).run(), items, g_max);
}

}  // namespace quasiseg
