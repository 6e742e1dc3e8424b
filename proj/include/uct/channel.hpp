#pragma once

#include <map>
#include <string>
#include <vector>

#include "uct/alphabet.hpp"
#include "uct/fst.hpp"

namespace uct {

// An emission operation: substitute a target char with a source char,
// delete a target char, or insert a source char.
enum class OpKind { Substitute, Delete, Insert };

struct OpId {
  OpKind kind;
  SymbolId target;  // consumed target char (0 for Insert)
  SymbolId source;  // emitted source char (0 for Delete)
  bool operator<(const OpId& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (target != o.target) return target < o.target;
    return source < o.source;
  }
  bool operator==(const OpId& o) const {
    return kind == o.kind && target == o.target && source == o.source;
  }
};

using OpCounts = std::map<OpId, double>;

// Dirichlet pseudocounts over emission operations. Unlisted pairs fall
// back to the base pseudocount.
struct PriorSpec {
  double base = 0.01;
  std::map<std::pair<SymbolId, SymbolId>, double> sub_boosts;  // (tgt, src)
  double pseudocount(SymbolId target, SymbolId source) const {
    auto it = sub_boosts.find({target, source});
    return it == sub_boosts.end() ? base : it->second;
  }
};

// Multinomial emission parameters. Per consumed target char c there is a
// distribution over {substitute(c -> o), delete(c), enter-insert-mode};
// the insert-mode probability is shared across chars, and the inserted
// source char comes from a position-independent distribution.
class EmissionParams {
 public:
  EmissionParams() = default;
  // Uniform-prior-mean initialization from the given prior.
  EmissionParams(int target_syms, int source_syms, const PriorSpec& prior);

  int target_syms() const { return target_syms_; }
  int source_syms() const { return source_syms_; }

  double sub_prob(SymbolId target, SymbolId source) const;
  double del_prob(SymbolId target) const;
  double ins_prob() const { return ins_prob_; }
  double ins_dist(SymbolId source) const;

  void set_row(SymbolId target, const std::vector<double>& sub_over_sources,
               double del_prob);
  void set_insertion(double ins_prob, const std::vector<double>& dist);

  // Checks every per-char distribution sums to 1 within tol.
  bool rows_normalized(double tol = 1e-9) const;

  // Checkpoint format: TSV rows `target<TAB>op<TAB>arg<TAB>prob` after a
  // metadata header.
  std::string serialize(const std::map<std::string, std::string>& meta) const;
  static EmissionParams deserialize(const std::string& text,
                                    std::map<std::string, std::string>* meta);
  void save(const std::string& path,
            const std::map<std::string, std::string>& meta) const;
  static EmissionParams load(const std::string& path,
                             std::map<std::string, std::string>* meta);

 private:
  int target_syms_ = 0;
  int source_syms_ = 0;
  // sub_[t][s]: p(substitute with s | consume t); del_[t]: p(delete | t).
  // Rows sum to 1 together with the shared ins_prob_.
  std::vector<std::vector<double>> sub_;
  std::vector<double> del_;
  double ins_prob_ = 0.0;
  std::vector<double> ins_dist_;
};

// Reads similarity resources into a prior. Files are TSV
// `target_char<TAB>source_char<TAB>pseudocount` (pseudocount optional,
// defaults to boost), '#' comments allowed. Characters outside the
// declared alphabets are skipped with a warning. Identical codepoints
// present in both alphabets are auto-paired at the boost value.
PriorSpec build_prior(const std::vector<std::string>& pair_files,
                      const Alphabet& target, const Alphabet& source,
                      double base, double boost,
                      std::vector<std::string>* warnings = nullptr);

// Builds the bounded-delay emission transducer: input = target chars,
// output = source chars, 2d+1 states indexed by cumulative
// insertions-minus-deletions in [-d, d]. Arc weight = -log prob.
Wfst build_channel(const EmissionParams& params, int delay_bound);

// MAP re-estimate: prob(op) proportional to max(count + alpha - 1, floor),
// renormalized per distribution. A row with no posterior mass falls back
// to the prior mean.
EmissionParams map_update(const OpCounts& expected, const PriorSpec& prior,
                          int target_syms, int source_syms);

}  // namespace uct
