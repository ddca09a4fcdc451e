#include "quasiseg/stats.hpp"

#include <cmath>
#include <string>

namespace quasiseg {

namespace {

using Int128 = __int128;

void check_channels(int channels) {
  if (channels != 1 && channels != 3) {
    throw StructuralError("unsupported channel count " + std::to_string(channels));
  }
}

int common_channels(const ClusterStats& a, const ClusterStats& b) {
  if (a.channels == 0) return b.channels;
  if (b.channels == 0) return a.channels;
  if (a.channels != b.channels) {
    throw StructuralError("channel count mismatch: " + std::to_string(a.channels) +
                          " vs " + std::to_string(b.channels));
  }
  return a.channels;
}

}  // namespace

ClusterStats ClusterStats::of_pixel(const ColorVec& pixel) {
  check_channels(pixel.channels);
  ClusterStats s;
  s.channels = pixel.channels;
  s.n = 1;
  for (int c = 0; c < pixel.channels; ++c) {
    s.sum[c] = pixel.value[c];
    s.sumsq += std::int64_t{pixel.value[c]} * pixel.value[c];
  }
  return s;
}

std::array<double, kMaxChannels> ClusterStats::mean() const {
  std::array<double, kMaxChannels> m{};
  if (n == 0) return m;
  for (int c = 0; c < channels; ++c) m[c] = static_cast<double>(sum[c]) / static_cast<double>(n);
  return m;
}

ClusterStats stats_of_pixels(std::span<const ColorVec> pixels) {
  ClusterStats s;
  for (const ColorVec& p : pixels) {
    if (s.channels != 0 && p.channels != s.channels) {
      throw StructuralError("pixels with mixed channel counts");
    }
    s = merge_stats(s, ClusterStats::of_pixel(p));
  }
  return s;
}

ClusterStats merge_stats(const ClusterStats& a, const ClusterStats& b) {
  ClusterStats s;
  s.channels = common_channels(a, b);
  s.n = a.n + b.n;
  for (int c = 0; c < kMaxChannels; ++c) s.sum[c] = a.sum[c] + b.sum[c];
  s.sumsq = a.sumsq + b.sumsq;
  return s;
}

ClusterStats subtract_stats(const ClusterStats& whole, const ClusterStats& part) {
  ClusterStats s;
  s.channels = common_channels(whole, part);
  s.n = whole.n - part.n;
  if (s.n < 0) throw std::domain_error("subtracting a larger cluster");
  for (int c = 0; c < kMaxChannels; ++c) s.sum[c] = whole.sum[c] - part.sum[c];
  s.sumsq = whole.sumsq - part.sumsq;
  if (s.n == 0) s.channels = whole.channels;
  return s;
}

double cluster_error(const ClusterStats& s) {
  if (s.n <= 1) return 0.0;
  Int128 norm2 = 0;
  for (int c = 0; c < s.channels; ++c) norm2 += Int128{s.sum[c]} * s.sum[c];
  // n * E = n * sumsq - |sum|^2, exact.
  const Int128 scaled = Int128{s.n} * s.sumsq - norm2;
  if (scaled <= 0) return 0.0;
  return static_cast<double>(static_cast<long double>(scaled) / static_cast<long double>(s.n));
}

double merge_increment(const ClusterStats& a, const ClusterStats& b) {
  if (a.n <= 0 || b.n <= 0) throw std::domain_error("merge_increment of an empty cluster");
  const int channels = common_channels(a, b);
  Int128 num = 0;
  for (int c = 0; c < channels; ++c) {
    const Int128 d = Int128{b.n} * a.sum[c] - Int128{a.n} * b.sum[c];
    num += d * d;
  }
  if (num == 0) return 0.0;
  const Int128 den = Int128{a.n} * b.n * (a.n + b.n);
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

double sigma_from_error(double error, std::int64_t n, int channels) {
  if (n <= 0) throw std::domain_error("sigma of an empty pixel set");
  if (error < 0.0) throw std::domain_error("negative approximation error");
  check_channels(channels);
  return std::sqrt(error / (static_cast<double>(channels) * static_cast<double>(n)));
}

}  // namespace quasiseg
