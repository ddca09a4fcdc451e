#ifndef QUASISEG_STATS_HPP
#define QUASISEG_STATS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace quasiseg {

/// Raised when inputs disagree structurally (mixed channel counts, bad shapes).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxChannels = 3;

/// A pixel sample with 1 (gray) or 3 (color) integer intensity channels.
struct ColorVec {
  int channels = 1;
  std::array<std::int32_t, kMaxChannels> value{};

  static ColorVec gray(std::int32_t v) { return {1, {v, 0, 0}}; }
  static ColorVec rgb(std::int32_t r, std::int32_t g, std::int32_t b) {
    return {3, {r, g, b}};
  }
};

/// Sufficient statistics of a pixel cluster. All fields are exact integers, so
/// merging and un-merging clusters is bit-exact.
///
/// An empty cluster may carry channels == 0 ("any"), which makes it the
/// identity element of merge_stats regardless of the other operand's width.
struct ClusterStats {
  int channels = 0;
  std::int64_t n = 0;
  std::array<std::int64_t, kMaxChannels> sum{};
  std::int64_t sumsq = 0;

  static ClusterStats of_pixel(const ColorVec& pixel);

  bool empty() const { return n == 0; }
  /// Per-channel mean intensity. Channels past `channels` are zero.
  std::array<double, kMaxChannels> mean() const;

  friend bool operator==(const ClusterStats&, const ClusterStats&) = default;
};

ClusterStats stats_of_pixels(std::span<const ColorVec> pixels);

ClusterStats merge_stats(const ClusterStats& a, const ClusterStats& b);

/// Inverse of merge_stats: returns `whole` with `part` removed.
ClusterStats subtract_stats(const ClusterStats& whole, const ClusterStats& part);

/// Total squared deviation of the cluster's pixels from its mean,
/// sumsq - |sum|^2 / n. Zero for empty and single-pixel clusters.
double cluster_error(const ClusterStats& s);

/// Increase of the total squared error caused by uniting two non-empty
/// clusters: n1*n2/(n1+n2) * |mean1 - mean2|^2.
///
/// Evaluated as |n2*sum1 - n1*sum2|^2 / (n1*n2*(n1+n2)) with a 128-bit exact
/// numerator and denominator, so the result is symmetric to the last bit and
/// depends only on the integer statistics.
double merge_increment(const ClusterStats& a, const ClusterStats& b);

/// Standard deviation per sample for a total squared error E over n pixels of
/// c channels: E = c * n * sigma^2.
double sigma_from_error(double error, std::int64_t n, int channels);

}  // namespace quasiseg

#endif  // QUASISEG_STATS_HPP
