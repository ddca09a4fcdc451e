#include "quasiseg/cli.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "quasiseg/asi.hpp"
#include "quasiseg/image.hpp"
#include "quasiseg/oracle.hpp"
#include "quasiseg/restructurer.hpp"
#include "quasiseg/segmenter.hpp"
#include "quasiseg/serialize.hpp"
#include "quasiseg/ward.hpp"

namespace quasiseg {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InputKind { kImage, kDump };

InputKind sniff(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError(ImageError::Kind::kIo, "cannot open " + path);
  char head[2] = {0, 0};
  in.read(head, 2);
  if (head[0] == 'P' && std::isdigit(static_cast<unsigned char>(head[1]))) return InputKind::kImage;
  if (head[0] == '#') return InputKind::kDump;
  throw FormatError(path + " is neither a portable anymap nor a hierarchy dump");
}

struct Settings {
  std::string input;
  std::string output;
  double epsilon = 1e-9;
  std::string method = "convert";
  std::string hierarchy;
  std::string mode = "segmentation";
  std::size_t g = 0;
  std::size_t gmax = 1000;
  bool connected = false;
};

Hierarchy build(const ImageRaster& image, const std::string& method, double epsilon) {
  if (method == "cluster") {
    const auto pixels = image.pixel_stats();
    return ward_cluster(pixels);
  }
  if (method == "segment") return greedy_segment(image);
  return segment_restructured(image, epsilon);
}

ImageRaster require_image(const Settings& s) {
  if (s.input.empty()) throw UsageError("--input is required");
  if (sniff(s.input) != InputKind::kImage) throw FormatError(s.input + " is not an image");
  return load_image(s.input);
}

// The hierarchy named by --hierarchy, else the --input dump, else one built
// from the --input image with --method.
Hierarchy require_hierarchy(const Settings& s, const std::optional<ImageRaster>& image) {
  if (!s.hierarchy.empty()) return load_dump(s.hierarchy);
  if (image) return build(*image, s.method, s.epsilon);
  if (s.input.empty()) throw UsageError("--input is required");
  if (sniff(s.input) == InputKind::kDump) return load_dump(s.input);
  return build(load_image(s.input), s.method, s.epsilon);
}

void check_leaves(const Hierarchy& h, const ImageRaster& image) {
  if (h.leaf_count() != image.pixel_count()) {
    throw StructuralError("hierarchy has " + std::to_string(h.leaf_count()) + " leaves but the image has " +
                          std::to_string(image.pixel_count()) + " pixels");
  }
}

template <class Writer>
void emit(const Settings& s, std::ostream& out, Writer&& write) {
  if (s.output.empty()) {
    write(out);
    return;
  }
  std::ofstream file(s.output, std::ios::binary);
  if (!file) throw FormatError("cannot write " + s.output);
  write(file);
  if (!file) throw FormatError("write failed for " + s.output);
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void run_build(const Settings& s, const std::string& method, std::ostream& out) {
  const auto h = build(require_image(s), method, s.epsilon);
  emit(s, out, [&](std::ostream& o) { write_dump(h, o); });
}

void run_dump(const Settings& s, std::ostream& out) {
  const auto h = require_hierarchy(s, std::nullopt);
  emit(s, out, [&](std::ostream& o) { write_dump(h, o); });
}

void run_curve(const Settings& s, std::ostream& out) {
  const auto h = require_hierarchy(s, std::nullopt);
  const auto curve = error_curve(h, std::min(s.gmax, h.leaf_count()));
  emit(s, out, [&](std::ostream& o) { write_curve(curve, o); });
}

void run_render(const Settings& s) {
  if (s.output.empty()) throw UsageError("render needs --output");
  const auto image = require_image(s);
  const auto h = require_hierarchy(s, image);
  check_leaves(h, image);
  const auto p = cut_at(h, s.g);
  render_partition(image, p, s.output, !is_plain_format(s.input));
}

void run_asi(const Settings& s, std::ostream& out, std::ostream& err) {
  AsiOptions options;
  options.relative_epsilon = s.epsilon;
  options.mode = s.mode == "clustering" ? AsiMode::kClustering : AsiMode::kSegmentation;
  std::optional<ImageRaster> image;
  if (options.mode == AsiMode::kSegmentation || (s.hierarchy.empty() && !s.input.empty() &&
                                                 sniff(s.input) == InputKind::kImage)) {
    image = require_image(s);
    options.grid = image->shape();
  }
  const auto h = require_hierarchy(s, image);
  if (image) check_leaves(h, *image);
  const auto result = asi_improve(h, s.g, options);
  err << "rounds " << result.rounds << "\n"
      << "E " << fixed(result.errors.front()) << " -> " << fixed(result.errors.back()) << "\n"
      << "criterion " << (result.criterion_met ? "met" : "not met") << "\n";
  emit(s, out, [&](std::ostream& o) { write_dump(result.hierarchy, o); });
}

void run_oracle(const Settings& s, std::ostream& out) {
  const auto image = require_image(s);
  const auto pixels = image.pixel_stats();
  const auto best = s.connected ? optimal_connected_partition(image, s.g) : optimal_partition(pixels, s.g);
  emit(s, out, [&](std::ostream& o) {
    o << "E " << fixed(best.error) << "\n";
    for (std::size_t y = 0; y < image.height; ++y) {
      for (std::size_t x = 0; x < image.width; ++x) {
        o << (x ? " " : "") << best.assignment[y * image.width + x];
      }
      o << "\n";
    }
  });
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical pixel clustering and image segmentation", "quasiseg"};
  app.fallthrough();
  app.require_subcommand(1);
  Settings s;
  app.add_option("--input", s.input, "Input image (P2/P3/P5/P6) or hierarchy dump");
  app.add_option("--output", s.output, "Output path (stdout for text outputs when omitted)");
  app.add_option("--epsilon", s.epsilon, "Relative convexity tolerance")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  const std::map<std::string, std::string> build_help = {
      {"cluster", "Ward clustering of the pixels, written as a dump"},
      {"segment", "Greedy adjacency-constrained segmentation, written as a dump"},
      {"convert", "Segmentation restructured into a convex hierarchy, written as a dump"}};
  std::vector<std::pair<CLI::App*, std::string>> builders;
  for (const char* name : {"cluster", "segment", "convert"}) {
    builders.emplace_back(app.add_subcommand(name, build_help.at(name)), name);
  }

  auto add_method = [&](CLI::App* sub) {
    sub->add_option("--method", s.method, "How to build the hierarchy from an image")
        ->check(CLI::IsMember({"cluster", "segment", "convert"}))
        ->capture_default_str();
    sub->add_option("--hierarchy", s.hierarchy, "Hierarchy dump to use instead of building one");
  };

  auto* asi = app.add_subcommand("asi", "Improve the g-cluster partition of a hierarchy");
  asi->add_option("--g", s.g, "Cluster count")->required()->check(CLI::PositiveNumber);
  asi->add_option("--mode", s.mode, "Merge rule")
      ->check(CLI::IsMember({"clustering", "segmentation"}))
      ->capture_default_str();
  add_method(asi);

  auto* curve = app.add_subcommand("curve", "Export the g,E,sigma curve of a hierarchy as CSV");
  curve->add_option("--gmax", s.gmax, "Largest cluster count")->check(CLI::PositiveNumber)->capture_default_str();
  add_method(curve);

  auto* render = app.add_subcommand("render", "Paint the g-cluster cut in cluster mean colors");
  render->add_option("--g", s.g, "Cluster count")->required()->check(CLI::PositiveNumber);
  add_method(render);

  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimal partition of a tiny image");
  oracle->add_option("--g", s.g, "Cluster count")->required()->check(CLI::PositiveNumber);
  oracle->add_flag("--connected", s.connected, "Only 4-connected clusters");

  auto* dump = app.add_subcommand("dump", "Write a hierarchy dump");
  add_method(dump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [sub, name] : builders) {
      if (sub->parsed()) run_build(s, name, out);
    }
    if (asi->parsed()) run_asi(s, out, err);
    if (curve->parsed()) run_curve(s, out);
    if (render->parsed()) run_render(s);
    if (oracle->parsed()) run_oracle(s, out);
    if (dump->parsed()) run_dump(s, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace quasiseg
