#include "quasiseg/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace quasiseg {

namespace {

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

double parse_double(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string("bad ") + what + " '" + tok + "'");
  }
}

long long parse_int(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string("bad ") + what + " '" + tok + "'");
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300}) + 1e-12;
}

}  // namespace

void write_curve(const ErrorCurve& curve, std::ostream& out) {
  out << "g,E,sigma\n";
  for (const auto& row : curve.rows) {
    out << row.g << ',' << format("%.9g", row.error) << ',' << format("%.9g", row.sigma) << '\n';
  }
}

ErrorCurve read_curve(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty curve file");
  strip_cr(line);
  if (line != "g,E,sigma") throw FormatError("curve header must be 'g,E,sigma'");
  ErrorCurve curve;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw FormatError("curve row needs 3 fields: '" + line + "'");
    const long long g = parse_int(fields[0], "g");
    if (g < 1) throw FormatError("cluster count must be positive");
    curve.rows.push_back({static_cast<std::size_t>(g), parse_double(fields[1], "E"),
                          parse_double(fields[2], "sigma")});
  }
  return curve;
}

void export_curve(const ErrorCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_curve(curve, out);
  if (!out) throw FormatError("write failed for " + path.string());
}

ErrorCurve import_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_curve(in);
}

void write_dump(const Hierarchy& h, std::ostream& out) {
  const int channels = h.channels();
  out << "# quasiseg hierarchy\n";
  out << "# leaves " << h.leaf_count() << " channels " << channels << " root " << h.root() << '\n';
  out << "# id parent left right n mean... merge_cost merge_rank\n";
  const auto nodes = h.nodes();
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& node = nodes[id];
    out << id << ' ' << node.parent << ' ' << node.left << ' ' << node.right << ' ' << node.stats.n;
    const auto mean = node.stats.mean();
    for (int c = 0; c < channels; ++c) out << ' ' << format("%.6f", mean[c]);
    out << ' ' << format("%.17g", node.merge_cost) << ' ' << node.merge_rank << '\n';
  }
  const auto labels = h.leaf_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != static_cast<std::int64_t>(i)) out << "label " << i << ' ' << labels[i] << '\n';
  }
}

Hierarchy read_dump(std::istream& in) {
  std::string line;
  std::size_t leaves = 0;
  int channels = 0;
  bool have_shape = false;
  struct Record {
    long long parent, left, right, n, rank;
    std::array<double, kMaxChannels> mean{};
    double cost;
    bool seen = false;
  };
  std::vector<Record> records;
  std::vector<std::int64_t> labels;

  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "#") {
      if (tok.size() == 7 && tok[1] == "leaves" && tok[3] == "channels" && tok[5] == "root") {
        const long long n = parse_int(tok[2], "leaf count");
        channels = static_cast<int>(parse_int(tok[4], "channel count"));
        if (n < 1) throw FormatError("leaf count must be positive");
        if (channels != 1 && channels != 3) throw FormatError("channel count must be 1 or 3");
        leaves = static_cast<std::size_t>(n);
        records.assign(2 * leaves - 1, Record{});
        labels.resize(leaves);
        for (std::size_t i = 0; i < leaves; ++i) labels[i] = static_cast<std::int64_t>(i);
        have_shape = true;
      }
      continue;
    }
    if (!have_shape) throw FormatError("node record before the '# leaves' header");
    if (tok[0] == "label") {
      if (tok.size() != 3) throw FormatError("label line needs 2 fields");
      const long long leaf = parse_int(tok[1], "leaf id");
      if (leaf < 0 || static_cast<std::size_t>(leaf) >= leaves) throw FormatError("label for a non-leaf");
      labels[leaf] = parse_int(tok[2], "label");
      continue;
    }
    if (tok.size() != static_cast<std::size_t>(7 + channels)) {
      throw FormatError("node record needs " + std::to_string(7 + channels) + " fields: '" + line + "'");
    }
    const long long id = parse_int(tok[0], "id");
    if (id < 0 || static_cast<std::size_t>(id) >= records.size()) throw FormatError("node id out of range");
    auto& r = records[id];
    if (r.seen) throw FormatError("duplicate node " + tok[0]);
    r.seen = true;
    r.parent = parse_int(tok[1], "parent");
    r.left = parse_int(tok[2], "left");
    r.right = parse_int(tok[3], "right");
    r.n = parse_int(tok[4], "n");
    for (int c = 0; c < channels; ++c) r.mean[c] = parse_double(tok[5 + c], "mean");
    r.cost = parse_double(tok[5 + channels], "merge_cost");
    r.rank = parse_int(tok[6 + channels], "merge_rank");
  }
  if (!have_shape) throw FormatError("missing '# leaves' header");

  std::vector<ClusterStats> leaf_stats(leaves);
  for (std::size_t i = 0; i < leaves; ++i) {
    const auto& r = records[i];
    if (!r.seen) throw FormatError("missing node " + std::to_string(i));
    if (r.left != -1 || r.right != -1) throw FormatError("node " + std::to_string(i) + " must be a leaf");
    if (r.n < 1) throw FormatError("leaf " + std::to_string(i) + " is empty");
    auto& s = leaf_stats[i];
    s.channels = channels;
    s.n = r.n;
    __int128 norm2 = 0;
    for (int c = 0; c < channels; ++c) {
      s.sum[c] = std::llround(r.mean[c] * static_cast<double>(r.n));
      norm2 += static_cast<__int128>(s.sum[c]) * s.sum[c];
    }
    s.sumsq = static_cast<std::int64_t>((norm2 + r.n - 1) / r.n);
  }
  std::vector<MergePair> children(leaves - 1);
  std::vector<std::int32_t> ranks(leaves - 1);
  for (std::size_t i = 0; i + 1 < leaves; ++i) {
    const auto& r = records[leaves + i];
    if (!r.seen) throw FormatError("missing node " + std::to_string(leaves + i));
    children[i] = {static_cast<NodeId>(r.left), static_cast<NodeId>(r.right)};
    ranks[i] = static_cast<std::int32_t>(r.rank);
  }

  Hierarchy h;
  try {
    h = Hierarchy::assemble(std::move(leaf_stats), children, ranks, std::move(labels));
  } catch (const StructuralError& e) {
    throw FormatError(std::string("inconsistent hierarchy: ") + e.what());
  }
  for (std::size_t id = 0; id < records.size(); ++id) {
    const auto& r = records[id];
    const auto& node = h.node(static_cast<NodeId>(id));
    if (r.parent != node.parent || r.n != node.stats.n || !close(r.cost, node.merge_cost, 1e-8)) {
      throw FormatError("node " + std::to_string(id) + " disagrees with its children");
    }
  }
  return h;
}

void save_dump(const Hierarchy& h, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_dump(h, out);
  if (!out) throw FormatError("write failed for " + path.string());
}

Hierarchy load_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_dump(in);
}

}  // namespace quasiseg
