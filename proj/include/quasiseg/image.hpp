#ifndef QUASISEG_IMAGE_HPP
#define QUASISEG_IMAGE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quasiseg/hierarchy.hpp"
#include "quasiseg/stats.hpp"

namespace quasiseg {

struct GridShape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t size() const { return width * height; }
};

class ImageError : public std::runtime_error {
 public:
  enum class Kind { kUnsupportedFormat, kBadMaxval, kTruncated, kMalformed, kIo };

  ImageError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// 8-bit raster, row-major, channels interleaved.
struct ImageRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 1;
  std::vector<std::uint8_t> samples;

  GridShape shape() const { return {width, height}; }
  std::size_t pixel_count() const { return width * height; }
  ColorVec pixel(std::size_t index) const;
  std::vector<ClusterStats> pixel_stats() const;

  friend bool operator==(const ImageRaster&, const ImageRaster&) = default;
};

/// Parses a portable graymap/pixmap (P2, P3, P5, P6) with maxval 255.
ImageRaster parse_image(std::string_view bytes);
ImageRaster load_image(const std::filesystem::path& path);

/// Binary output writes P5/P6, otherwise P2/P3, always with the header
/// "Px\n<w> <h>\n255\n".
std::string encode_image(const ImageRaster& image, bool binary = true);
void save_image(const ImageRaster& image, const std::filesystem::path& path, bool binary = true);

/// Piecewise-constant approximation: every pixel takes its cluster's mean,
/// rounded half up per channel. `p.labels` is indexed by pixel.
ImageRaster approximate(const ImageRaster& image, const Partition& p);

/// Writes approximate(image, p) in the image's family (graymap or pixmap),
/// binary unless `binary` is false.
void render_partition(const ImageRaster& image, const Partition& p,
                      const std::filesystem::path& path, bool binary = true);

/// True when the file starts with a plain-text magic number (P2 or P3).
bool is_plain_format(const std::filesystem::path& path);

}  // namespace quasiseg

#endif  // QUASISEG_IMAGE_HPP
