#include "quasiseg/image.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

namespace quasiseg {

namespace {

using Kind = ImageError::Kind;

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  // Next whitespace-delimited token, skipping '#' comments. Empty at EOF.
  std::string_view token() {
    for (;;) {
      while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
      if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    return bytes_.substr(start, pos_ - start);
  }

  std::size_t number(const char* what) {
    const auto tok = token();
    if (tok.empty()) throw ImageError(Kind::kTruncated, std::string("missing ") + what);
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || end != tok.data() + tok.size()) {
      throw ImageError(Kind::kMalformed, std::string("bad ") + what + " '" + std::string(tok) + "'");
    }
    return value;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ColorVec ImageRaster::pixel(std::size_t index) const {
  ColorVec v;
  v.channels = channels;
  for (int c = 0; c < channels; ++c) v.value[c] = samples[index * channels + c];
  return v;
}

std::vector<ClusterStats> ImageRaster::pixel_stats() const {
  std::vector<ClusterStats> stats(pixel_count());
  for (std::size_t i = 0; i < stats.size(); ++i) stats[i] = ClusterStats::of_pixel(pixel(i));
  return stats;
}

ImageRaster parse_image(std::string_view bytes) {
  HeaderReader reader(bytes);
  const auto magic = reader.token();
  if (magic.size() != 2 || magic[0] != 'P' ||
      (magic[1] != '2' && magic[1] != '3' && magic[1] != '5' && magic[1] != '6')) {
    throw ImageError(Kind::kUnsupportedFormat, "unsupported magic number '" + std::string(magic) + "'");
  }
  const bool binary = magic[1] == '5' || magic[1] == '6';
  ImageRaster image;
  image.channels = (magic[1] == '3' || magic[1] == '6') ? 3 : 1;
  image.width = reader.number("width");
  image.height = reader.number("height");
  const std::size_t maxval = reader.number("maxval");
  if (maxval != 255) throw ImageError(Kind::kBadMaxval, "maxval " + std::to_string(maxval) + " is not 255");
  if (image.width == 0 || image.height == 0) throw ImageError(Kind::kMalformed, "empty raster");

  const std::size_t count = image.width * image.height * static_cast<std::size_t>(image.channels);
  image.samples.resize(count);
  if (binary) {
    // Exactly one whitespace byte separates maxval from the payload.
    const std::size_t start = reader.pos() + 1;
    if (start > bytes.size() || bytes.size() - start < count) {
      throw ImageError(Kind::kTruncated, "payload holds fewer than " + std::to_string(count) + " bytes");
    }
    for (std::size_t i = 0; i < count; ++i) image.samples[i] = static_cast<std::uint8_t>(bytes[start + i]);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t v = reader.number("sample");
      if (v > 255) throw ImageError(Kind::kMalformed, "sample " + std::to_string(v) + " exceeds maxval");
      image.samples[i] = static_cast<std::uint8_t>(v);
    }
  }
  return image;
}

ImageRaster load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError(Kind::kIo, "cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_image(bytes);
}

std::string encode_image(const ImageRaster& image, bool binary) {
  const char kind = image.channels == 3 ? (binary ? '6' : '3') : (binary ? '5' : '2');
  std::string out = "P";
  out += kind;
  out += '\n' + std::to_string(image.width) + ' ' + std::to_string(image.height) + "\n255\n";
  if (binary) {
    out.append(image.samples.begin(), image.samples.end());
    return out;
  }
  const std::size_t per_row = image.width * static_cast<std::size_t>(image.channels);
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    out += std::to_string(image.samples[i]);
    out += (i + 1) % per_row == 0 ? '\n' : ' ';
  }
  return out;
}

void save_image(const ImageRaster& image, const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageError(Kind::kIo, "cannot write " + path.string());
  const auto bytes = encode_image(image, binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageError(Kind::kIo, "write failed for " + path.string());
}

ImageRaster approximate(const ImageRaster& image, const Partition& p) {
  const std::size_t n = image.pixel_count();
  if (p.labels.size() != n) {
    throw StructuralError("partition labels " + std::to_string(p.labels.size()) +
                          " do not match " + std::to_string(n) + " pixels");
  }
  NodeId max_label = 0;
  for (NodeId l : p.labels) {
    if (l < 0) throw StructuralError("unlabelled pixel");
    max_label = std::max(max_label, l);
  }
  std::vector<ClusterStats> stats(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t i = 0; i < n; ++i) {
    stats[p.labels[i]] = merge_stats(stats[p.labels[i]], ClusterStats::of_pixel(image.pixel(i)));
  }
  ImageRaster out = image;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = stats[p.labels[i]];
    for (int c = 0; c < image.channels; ++c) {
      // floor(sum / n + 1/2) without leaving integers.
      out.samples[i * image.channels + c] = static_cast<std::uint8_t>((2 * s.sum[c] + s.n) / (2 * s.n));
    }
  }
  return out;
}

void render_partition(const ImageRaster& image, const Partition& p, const std::filesystem::path& path,
                      bool binary) {
  save_image(approximate(image, p), path, binary);
}

bool is_plain_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError(ImageError::Kind::kIo, "cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  return magic[0] == 'P' && (magic[1] == '2' || magic[1] == '3');
}

}  // namespace quasiseg
