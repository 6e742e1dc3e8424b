// Independent brute-force oracles used by the test suites. These stay
// deliberately naive: exhaustive enumeration, no shared code with the
// implementations they check.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "uct/channel.hpp"
#include "uct/fst.hpp"

namespace oracle {

struct RawPath {
  std::vector<uct::SymbolId> input;
  std::vector<uct::SymbolId> output;
  double weight = 0.0;
};

// All accepting paths by DFS. Only safe on acyclic machines.
inline std::vector<RawPath> enumerate_paths(const uct::Wfst& m,
                                            size_t max_paths = 2000000) {
  std::vector<RawPath> paths;
  std::function<void(int, RawPath&)> dfs = [&](int s, RawPath& cur) {
    if (paths.size() >= max_paths)
      throw std::runtime_error("oracle path explosion");
    if (m.is_final(s)) {
      RawPath done = cur;
      done.weight += m.final_weight(s);
      paths.push_back(done);
    }
    for (const uct::Arc& a : m.arcs(s)) {
      RawPath next = cur;
      if (a.in != 0) next.input.push_back(a.in);
      if (a.out != 0) next.output.push_back(a.out);
      next.weight += a.weight;
      dfs(a.dst, next);
    }
  };
  RawPath root;
  if (m.num_states() > 0) dfs(m.start(), root);
  return paths;
}

inline double logsumexp_neglog(const std::vector<double>& neglogs) {
  double total = 0.0;
  for (double w : neglogs) total += std::exp(-w);
  return -std::log(total);
}

inline double min_weight(const std::vector<double>& ws) {
  double best = uct::kInfWeight;
  for (double w : ws) best = std::min(best, w);
  return best;
}

// Aggregated weight per (input string, output string) pair under the log
// semiring; detects composition double counting.
inline std::map<std::pair<std::vector<uct::SymbolId>, std::vector<uct::SymbolId>>,
                double>
pair_weights_log(const uct::Wfst& m) {
  std::map<std::pair<std::vector<uct::SymbolId>, std::vector<uct::SymbolId>>,
           std::vector<double>>
      acc;
  for (const auto& p : enumerate_paths(m)) acc[{p.input, p.output}].push_back(p.weight);
  std::map<std::pair<std::vector<uct::SymbolId>, std::vector<uct::SymbolId>>,
           double>
      out;
  for (const auto& [k, ws] : acc) out[k] = logsumexp_neglog(ws);
  return out;
}

// All delay-bounded alignments of y to x with their probabilities.
struct Alignment {
  std::vector<uct::OpId> ops;
  double prob = 1.0;
};

inline std::vector<Alignment> enumerate_alignments(
    const std::vector<uct::SymbolId>& y, const std::vector<uct::SymbolId>& x,
    const uct::EmissionParams& p, int d) {
  std::vector<Alignment> result;
  std::function<void(size_t, size_t, Alignment&)> rec = [&](size_t i, size_t j,
                                                            Alignment& cur) {
    const long long delay =
        static_cast<long long>(j) - static_cast<long long>(i);
    if (delay > d || delay < -d) return;
    if (i == y.size() && j == x.size()) {
      result.push_back(cur);
      return;
    }
    if (i < y.size() && j < x.size()) {
      Alignment next = cur;
      next.ops.push_back({uct::OpKind::Substitute, y[i], x[j]});
      next.prob *= p.sub_prob(y[i], x[j]);
      rec(i + 1, j + 1, next);
    }
    if (i < y.size()) {
      Alignment next = cur;
      next.ops.push_back({uct::OpKind::Delete, y[i], 0});
      next.prob *= p.del_prob(y[i]);
      rec(i + 1, j, next);
    }
    if (j < x.size()) {
      Alignment next = cur;
      next.ops.push_back({uct::OpKind::Insert, 0, x[j]});
      next.prob *= p.ins_prob() * p.ins_dist(x[j]);
      rec(i, j + 1, next);
    }
  };
  Alignment root;
  rec(0, 0, root);
  return result;
}

inline double alignment_total_prob(const std::vector<Alignment>& aligns) {
  double total = 0.0;
  for (const auto& a : aligns) total += a.prob;
  return total;
}

inline uct::OpCounts alignment_expected_counts(
    const std::vector<Alignment>& aligns) {
  const double total = alignment_total_prob(aligns);
  uct::OpCounts counts;
  for (const auto& a : aligns) {
    const double post = a.prob / total;
    for (const auto& op : a.ops) counts[op] += post;
  }
  return counts;
}

// Plain recursive edit distance, unit costs, exponential time.
inline int edit_distance_recursive(const std::vector<int>& a,
                                   const std::vector<int>& b, size_t i = 0,
                                   size_t j = 0) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  if (a[i] == b[j]) return edit_distance_recursive(a, b, i + 1, j + 1);
  const int sub = edit_distance_recursive(a, b, i + 1, j + 1);
  const int del = edit_distance_recursive(a, b, i + 1, j);
  const int ins = edit_distance_recursive(a, b, i, j + 1);
  return 1 + std::min(sub, std::min(del, ins));
}

// Random acyclic transducer: arcs only go forward in state order.
inline uct::Wfst random_acyclic_wfst(std::mt19937& rng, int max_states = 8,
                                     int max_label = 3,
                                     bool allow_epsilon = true) {
  std::uniform_int_distribution<int> n_states(2, max_states);
  const int n = n_states(rng);
  uct::Wfst m(n, 0);
  std::uniform_int_distribution<int> label(allow_epsilon ? 0 : 1, max_label);
  std::uniform_real_distribution<double> weight(0.05, 3.0);
  std::uniform_int_distribution<int> n_arcs(1, 3);
  for (int s = 0; s < n - 1; ++s) {
    const int arcs = n_arcs(rng);
    std::uniform_int_distribution<int> dst(s + 1, n - 1);
    for (int a = 0; a < arcs; ++a)
      m.add_arc(s, label(rng), label(rng), weight(rng), dst(rng));
  }
  m.set_final(n - 1, weight(rng));
  std::uniform_int_distribution<int> coin(0, 3);
  for (int s = 1; s < n - 1; ++s)
    if (coin(rng) == 0) m.set_final(s, weight(rng));
  return m;
}

}  // namespace oracle
