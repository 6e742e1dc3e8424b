#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "uct/alphabet.hpp"

namespace uct {

constexpr double kInfWeight = std::numeric_limits<double>::infinity();

enum class Semiring { Tropical, Log };

// x (+) y in the chosen semiring; (*) is ordinary addition in both.
double semiring_plus(double x, double y, Semiring sr);

struct Arc {
  int dst;
  SymbolId in;   // 0 = epsilon
  SymbolId out;  // 0 = epsilon
  double weight; // negative log-probability
};

// Weighted finite-state transducer over negative-log weights. Machines are
// immutable after construction; all queries are read-only.
class Wfst {
 public:
  Wfst() = default;
  explicit Wfst(int num_states, int start = 0)
      : arcs_(num_states), start_(start) {}

  int add_state();
  void set_start(int s) { start_ = s; }
  void add_arc(int src, SymbolId in, SymbolId out, double weight, int dst);
  void set_final(int s, double weight = 0.0);

  int num_states() const { return static_cast<int>(arcs_.size()); }
  int start() const { return start_; }
  const std::vector<Arc>& arcs(int s) const { return arcs_[s]; }
  bool is_final(int s) const { return finals_.count(s) > 0; }
  double final_weight(int s) const;
  const std::map<int, double>& finals() const { return finals_; }

  size_t num_arcs() const;

  // Optional alphabet-size annotations checked by compose (0 = unchecked).
  int input_syms = 0;
  int output_syms = 0;

  std::string serialize() const;
  static Wfst deserialize(const std::string& text);
  void save(const std::string& path) const;
  static Wfst load(const std::string& path);

 private:
  std::vector<std::vector<Arc>> arcs_;
  std::map<int, double> finals_;
  int start_ = 0;
};

// Linear-chain acceptor for a token sequence (weight 0 everywhere).
Wfst make_acceptor(const std::vector<SymbolId>& tokens);

// Composition with the standard epsilon-sequencing filter, so no pair of
// paths is matched twice. Weights of matched arcs add. Throws on an
// annotated alphabet mismatch.
Wfst compose(const Wfst& a, const Wfst& b);

// Swaps input and output labels.
Wfst invert(const Wfst& m);

struct ShortestDistanceResult {
  std::vector<double> distance;  // from start, per state
  // (+)-total over all accepting paths: distance (*) final weight.
  double total = kInfWeight;
};

// Start-to-state distances under the semiring. Topological for acyclic
// machines; tropical falls back to Bellman-Ford on cyclic input, log mode
// throws on cycles.
ShortestDistanceResult shortest_distance(const Wfst& m, Semiring sr);

struct Path {
  std::vector<SymbolId> input;   // epsilon-free input labels
  std::vector<SymbolId> output;  // epsilon-free output labels
  double weight = 0.0;
  std::vector<std::pair<int, int>> arc_ids;  // (state, arc index) trace
};

// The n minimum-weight accepting paths in nondecreasing weight order.
// Distinct paths with identical string pairs are reported separately;
// ties break on (weight, output labels, arc-id sequence).
std::vector<Path> n_shortest_paths(const Wfst& m, size_t n);

// Convenience single best path; throws if the machine accepts nothing.
Path shortest_path(const Wfst& m);

}  // namespace uct
