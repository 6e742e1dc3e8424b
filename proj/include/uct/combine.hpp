#pragma once

#include <functional>
#include <string>
#include <vector>

#include "uct/channel.hpp"
#include "uct/fst.hpp"
#include "uct/seq2seq.hpp"

namespace uct {

// A decode hypothesis ranked by one model and rescored by another.
struct Candidate {
  std::vector<SymbolId> y;
  double generator_score = 0.0;
  double rescorer_score = kInfWeight;  // +inf marks unreachable candidates
};

// Scores an output string; +inf when the rescorer cannot reach it.
using Rescorer = std::function<double(const std::vector<SymbolId>&)>;

struct RerankReport {
  int unreachable = 0;  // candidates the rescorer scored +inf
};

// Fills rescorer scores and sorts ascending by them; +inf candidates keep
// their generator order among themselves at the tail. Ties keep generator
// order. Throws std::invalid_argument on an empty list.
std::vector<Candidate> rerank(const std::vector<Candidate>& candidates,
                              const Rescorer& rescorer,
                              RerankReport* report = nullptr);

// The n shortest paths of the decode lattice compose(cascade, acceptor(x)),
// projected to output strings; duplicate strings from distinct alignments
// are retained. cascade = compose(lm, channel). Throws on an empty lattice.
std::vector<Candidate> generate_candidates_wfst(const std::vector<SymbolId>& x,
                                                const Wfst& cascade, size_t n);

// Beam search over the seq2seq output distribution: the n best finished
// hypotheses (EOS taken or the |x| length cap reached) as candidates with
// generator score = sequence neg-log-prob. Empty x yields one empty
// candidate.
std::vector<Candidate> generate_candidates_seq2seq(
    const std::vector<SymbolId>& x, const Seq2SeqModel& model, size_t n);

// Rescorer over the noisy-channel cascade: -log of the log-semiring total
// of compose(acceptor(y), cascade, acceptor(x)); +inf when the delay bound
// leaves no path (candidate too short or long).
Rescorer make_wfst_rescorer(const std::vector<SymbolId>& x,
                            const Wfst& cascade);

// Seq2seq rescorer for source-to-target decoding of x. normalize divides
// by the number of scored predictions (|y|+1).
Rescorer make_seq2seq_rescorer(const std::vector<SymbolId>& x,
                               const Seq2SeqModel& model,
                               bool normalize = false);

// Per-step output distribution p(y_{t+1} | x, y_prefix), indexed by
// symbol id with EOS last; what poe_decode consults on every emitting arc.
using StepScorer = std::function<std::vector<double>(
    const std::vector<SymbolId>& x, const std::vector<SymbolId>& y_prefix)>;

StepScorer make_seq2seq_step_scorer(const Seq2SeqModel& model);

// One finalized product-of-experts hypothesis with its lattice trace.
struct PoeHypothesis {
  std::vector<SymbolId> y;
  double score = 0.0;
  std::vector<std::pair<int, int>> arc_trace;  // (state, arc index)
};

struct PoeResult {
  std::vector<SymbolId> y;
  double score = 0.0;
  // every hypothesis that reached a final state, best first; arc traces
  // index into the cascade the search ran over
  std::vector<PoeHypothesis> finalized;
};

// Product-of-experts beam search over compose(lm, channel) driven by x:
// every arc emitting an output char o adds -log scorer(o | x, y) on top of
// the lattice weight; epsilon-output arcs add lattice weight only.
// Hypotheses are grouped by consumed input count, insertion closure runs
// to a fixed point within a group before pruning to the beam_size best,
// and finalization adds the lattice final weight plus the scorer EOS term.
// Ties break on (score, lexicographic y). Throws when nothing finalizes.
PoeResult poe_decode(const std::vector<SymbolId>& x, const Wfst& cascade,
                     const StepScorer& scorer, size_t beam_size);

PoeResult poe_decode(const std::vector<SymbolId>& x, const Wfst& lm,
                     const Wfst& channel, const Seq2SeqModel& model,
                     size_t beam_size = 5);

// TSV n-best dump: rank<TAB>score<TAB>output per line.
std::string nbest_tsv(const std::vector<Candidate>& ranked,
                      const Alphabet& alphabet);

}  // namespace uct
