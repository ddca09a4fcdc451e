#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "quasiseg/image.hpp"
#include "quasiseg/segmenter.hpp"
#include "quasiseg/serialize.hpp"
#include "quasiseg/ward.hpp"
#include "testkit.hpp"

using namespace quasiseg;

namespace {

ImageError::Kind kind_of(std::string_view bytes) {
  try {
    parse_image(bytes);
  } catch (const ImageError& e) {
    return e.kind();
  }
  FAIL("image was accepted");
  return ImageError::Kind::kIo;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "quasiseg_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("parse_image formats") {
  const auto one = parse_image("P2 1 1 255 7");
  CHECK(one.width == 1);
  CHECK(one.channels == 1);
  CHECK(one.samples == std::vector<std::uint8_t>{7});

  const auto p3 = parse_image("P3\n# comment\n2 1\n255\n1 2 3 4 5 6\n");
  CHECK(p3.channels == 3);
  CHECK(p3.samples == std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
  CHECK(p3.pixel(1).value == std::array<std::int32_t, 3>{4, 5, 6});

  std::string p6 = "P6\n512 512\n255\n";
  p6.append(512 * 512 * 3, '\x80');
  const auto big = parse_image(p6);
  CHECK(big.samples.size() == 786432);

  const std::string p5 = std::string("P5 2 1 255\n") + '\0' + '\xff';
  CHECK(parse_image(p5).samples == std::vector<std::uint8_t>{0, 255});
}

TEST_CASE("parse_image error kinds") {
  CHECK(kind_of("P3 1 1 65535 1 2 3") == ImageError::Kind::kBadMaxval);
  CHECK(kind_of("P5 1 1 15\n\x01") == ImageError::Kind::kBadMaxval);
  CHECK(kind_of("P4 1 1\n\x01") == ImageError::Kind::kUnsupportedFormat);
  CHECK(kind_of("GIF89a") == ImageError::Kind::kUnsupportedFormat);
  CHECK(kind_of("P6 2 2 255\nabc") == ImageError::Kind::kTruncated);
  CHECK(kind_of("P2 2 1 255 1") == ImageError::Kind::kTruncated);
  CHECK(kind_of("P2 2 1 255 1 300") == ImageError::Kind::kMalformed);
  CHECK(kind_of("P2 x 1 255 1") == ImageError::Kind::kMalformed);
  CHECK(kind_of("P2 0 1 255") == ImageError::Kind::kMalformed);
  try {
    load_image(scratch("does-not-exist.pgm"));
    FAIL("missing file accepted");
  } catch (const ImageError& e) {
    CHECK(e.kind() == ImageError::Kind::kIo);
  }
}

TEST_CASE("encode and parse round-trip") {
  std::mt19937_64 rng(81);
  for (int channels : {1, 3}) {
    const auto img = testkit::random_image(rng, 7, 5, channels);
    CHECK(parse_image(encode_image(img, true)) == img);
    CHECK(parse_image(encode_image(img, false)) == img);
  }
}

TEST_CASE("render_partition") {
  const auto img = testkit::gray_image(3, 1, {0, 1, 5});
  const auto h = greedy_segment(img);
  CHECK(approximate(img, cut_at(h, 2)).samples == std::vector<std::uint8_t>{1, 1, 5});
  CHECK(approximate(img, cut_at(h, 1)).samples == std::vector<std::uint8_t>{2, 2, 2});
  CHECK(approximate(img, cut_at(h, 3)) == img);

  const auto half = testkit::gray_image(2, 1, {0, 3});
  const auto hh = greedy_segment(half);
  CHECK(approximate(half, cut_at(hh, 1)).samples == std::vector<std::uint8_t>{2, 2});

  Partition wrong;
  wrong.labels = {0, 0};
  CHECK_THROWS(approximate(img, wrong));

  const auto path = scratch("render.pgm");
  render_partition(img, cut_at(h, 2), path);
  CHECK(read_file(path) == std::string("P5\n3 1\n255\n") + '\x01' + '\x01' + '\x05');
}

TEST_CASE("render at g=N reproduces every format") {
  std::mt19937_64 rng(82);
  for (int channels : {1, 3}) {
    const auto img = testkit::random_image(rng, 6, 4, channels);
    const auto h = greedy_segment(img);
    const auto in = scratch("in.pnm");
    const auto out = scratch("out.pnm");
    save_image(img, in, true);
    render_partition(load_image(in), cut_at(h, img.pixel_count()), out);
    CHECK(read_file(in) == read_file(out));
    save_image(img, in, false);
    CHECK(load_image(in) == img);
  }
}

TEST_CASE("curve CSV") {
  std::ostringstream empty;
  write_curve(ErrorCurve{}, empty);
  CHECK(empty.str() == "g,E,sigma\n");

  const std::vector<MergePair> m = {{0, 1}, {3, 2}};
  const auto h = Hierarchy::build_from_merges(testkit::gray_stats({0, 1, 5}), m);
  std::ostringstream out;
  write_curve(error_curve(h, 3), out);
  CHECK(out.str() == "g,E,sigma\n1,14,2.1602469\n2,0.5,0.40824829\n3,0,0\n");

  std::mt19937_64 rng(83);
  const auto big = ward_cluster(testkit::to_stats(testkit::random_pixels(rng, 300, 3)));
  const auto curve = error_curve(big, 300);
  std::stringstream io;
  write_curve(curve, io);
  const auto back = read_curve(io);
  REQUIRE(back.rows.size() == curve.rows.size());
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    CHECK(back.rows[i].g == curve.rows[i].g);
    CHECK(testkit::close_rel(back.rows[i].error, curve.rows[i].error, 1e-8));
    CHECK(testkit::close_rel(back.rows[i].sigma, curve.rows[i].sigma, 1e-8));
  }

  std::istringstream bad_header("g,E\n1,2\n");
  CHECK_THROWS_AS(read_curve(bad_header), FormatError);
  std::istringstream bad_row("g,E,sigma\n1,x,3\n");
  CHECK_THROWS_AS(read_curve(bad_row), FormatError);

  const auto path = scratch("curve.csv");
  export_curve(curve, path);
  CHECK(import_curve(path).rows.size() == 300);
  CHECK_THROWS_AS(export_curve(curve, scratch("no/such/dir/curve.csv")), FormatError);
}

TEST_CASE("hierarchy dump round-trip") {
  std::mt19937_64 rng(84);
  for (int channels : {1, 3}) {
    const auto img = testkit::random_image(rng, 9, 7, channels);
    const auto h = segment_restructured(img);
    std::stringstream io;
    write_dump(h, io);
    const auto back = read_dump(io);
    REQUIRE(back.node_count() == h.node_count());
    for (std::size_t id = 0; id < h.node_count(); ++id) {
      CHECK(back.node(id).stats == h.node(id).stats);
      CHECK(back.node(id).parent == h.node(id).parent);
      CHECK(back.node(id).merge_rank == h.node(id).merge_rank);
      CHECK(testkit::close_rel(back.node(id).merge_cost, h.node(id).merge_cost, 1e-8));
    }
    std::stringstream again;
    write_dump(back, again);
    std::stringstream first;
    write_dump(h, first);
    CHECK(again.str() == first.str());
  }
}

TEST_CASE("hierarchy dump keeps leaf labels") {
  const std::vector<MergePair> m = {{0, 1}};
  const auto h = Hierarchy::build_from_merges(testkit::gray_stats({3, 9}), m, {7, 2});
  std::stringstream io;
  write_dump(h, io);
  CHECK(io.str().find("label 0 7") != std::string::npos);
  const auto back = read_dump(io);
  CHECK(back.leaf_labels()[0] == 7);
  CHECK(back.leaf_labels()[1] == 2);
}

TEST_CASE("hierarchy dump rejects damaged files") {
  const std::vector<MergePair> m = {{0, 1}, {3, 2}};
  const auto h = Hierarchy::build_from_merges(testkit::gray_stats({0, 1, 5}), m);
  std::ostringstream out;
  write_dump(h, out);
  const std::string good = out.str();

  auto reject = [](std::string text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_dump(in), FormatError);
  };
  reject("");
  reject("0 -1 -1 -1 1 0 0 0\n");
  std::string wrong_cost = good;
  wrong_cost.replace(wrong_cost.find("13.5"), 4, "13.9");
  reject(wrong_cost);
  std::string missing = good.substr(0, good.rfind("4 -1"));
  reject(missing);
  std::string bad_child = good;
  bad_child.replace(bad_child.find("3 4 0 1"), 7, "3 4 0 0");
  reject(bad_child);
  CHECK_THROWS_AS(load_dump(scratch("missing.dump")), FormatError);
}
