#include "quasiseg/ward.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace quasiseg {

namespace {

struct RawMerge {
  std::size_t a;
  std::size_t b;
  double cost;
};

// Nearest-neighbor chain. Costs come straight from the cluster statistics, so
// no distance matrix and no update formula are needed.
std::vector<RawMerge> nn_chain(std::span<const ClusterStats> items) {
  const std::size_t m = items.size();
  std::vector<ClusterStats> stats(items.begin(), items.end());
  stats.reserve(2 * m - 1);
  std::vector<std::size_t> active(m);
  for (std::size_t i = 0; i < m; ++i) active[i] = i;
  std::vector<std::size_t> chain;
  chain.reserve(m);
  std::vector<RawMerge> merges;
  merges.reserve(m - 1);

  while (active.size() > 1) {
    if (chain.empty()) chain.push_back(active.front());
    const std::size_t tip = chain.back();
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_cost = std::numeric_limits<double>::infinity();
    // The predecessor wins ties, which is what makes the chain terminate.
    if (chain.size() >= 2) {
      best = chain[chain.size() - 2];
      best_cost = merge_increment(stats[tip], stats[best]);
    }
    for (std::size_t other : active) {
      if (other == tip) continue;
      const double c = merge_increment(stats[tip], stats[other]);
      if (c < best_cost) {
        best_cost = c;
        best = other;
      }
    }
    if (chain.size() >= 2 && best == chain[chain.size() - 2]) {
      chain.pop_back();
      chain.pop_back();
      const std::size_t created = stats.size();
      stats.push_back(merge_stats(stats[tip], stats[best]));
      merges.push_back({std::min(tip, best), std::max(tip, best), best_cost});
      std::erase_if(active, [&](std::size_t x) { return x == tip || x == best; });
      active.push_back(created);
    } else {
      chain.push_back(best);
    }
  }
  return merges;
}

}  // namespace

std::vector<WardMerge> ward_merges(std::span<const ClusterStats> items) {
  const std::size_t m = items.size();
  if (m == 0) throw std::invalid_argument("ward clustering of an empty set");
  for (const auto& s : items) {
    if (s.n <= 0) throw std::invalid_argument("ward clustering of an empty cluster");
    if (s.channels != items.front().channels) throw StructuralError("items with mixed channel counts");
  }
  if (m == 1) return {};

  const auto raw = nn_chain(items);
  // Replay: chain cluster id -> final id. A raw merge becomes ready once both
  // of its operands exist in the final numbering.
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> final_id(2 * m - 1, kUnset);
  for (std::size_t i = 0; i < m; ++i) final_id[i] = i;
  std::vector<std::size_t> consumer(2 * m - 1, kUnset);
  for (std::size_t k = 0; k < raw.size(); ++k) consumer[raw[k].a] = consumer[raw[k].b] = k;

  using Key = std::tuple<double, std::size_t, std::size_t, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  std::vector<int> pending(raw.size(), 2);
  auto operand_ready = [&](std::size_t chain_id) {
    const std::size_t k = consumer[chain_id];
    if (k == kUnset || --pending[k] > 0) return;
    const std::size_t fa = final_id[raw[k].a];
    const std::size_t fb = final_id[raw[k].b];
    ready.emplace(raw[k].cost, std::min(fa, fb), std::max(fa, fb), k);
  };
  for (std::size_t i = 0; i < m; ++i) operand_ready(i);

  std::vector<WardMerge> out;
  out.reserve(m - 1);
  while (!ready.empty()) {
    const auto [cost, lo, hi, k] = ready.top();
    ready.pop();
    const std::size_t created = m + out.size();
    out.push_back({lo, hi, cost});
    final_id[m + k] = created;
    operand_ready(m + k);
  }
  return out;
}

Hierarchy ward_cluster(std::span<const ClusterStats> items) {
  const auto steps = ward_merges(items);
  std::vector<MergePair> merges;
  merges.reserve(steps.size());
  for (const auto& s : steps) {
    merges.push_back({static_cast<NodeId>(s.first), static_cast<NodeId>(s.second)});
  }
  return Hierarchy::build_from_merges(std::vector<ClusterStats>(items.begin(), items.end()), merges);
}

}  // namespace quasiseg
