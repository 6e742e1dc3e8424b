#pragma once

#include <functional>
#include <string>
#include <vector>

#include "uct/channel.hpp"
#include "uct/charlm.hpp"
#include "uct/corpus.hpp"
#include "uct/fst.hpp"

namespace uct {

// Log-semiring total channel weight of the pair (y, x): -log of the sum
// over all delay-bounded alignments. +inf when no alignment exists.
double channel_pair_weight(const std::vector<SymbolId>& y,
                           const std::vector<SymbolId>& x,
                           const EmissionParams& params, int delay_bound);

// Posterior expected operation counts under P(alignment | y, x), computed
// by forward-backward over the alignment grid (the y-channel-x lattice).
// Throws on a zero-probability pair.
OpCounts expected_counts(const std::vector<SymbolId>& y,
                         const std::vector<SymbolId>& x,
                         const EmissionParams& params, int delay_bound);

// Most probable target sequence for x under lm o channel: tropical
// shortest path through the composed lattice, read off the target side.
// `cascade` is compose(lm_acceptor, channel). Throws when the delay bound
// leaves no path.
std::vector<SymbolId> decode_best_cascade(const std::vector<SymbolId>& x,
                                          const Wfst& cascade);

std::vector<SymbolId> decode_best(const std::vector<SymbolId>& x,
                                  const Wfst& lm, const Wfst& channel);

// Decodes a corpus, preserving input order. workers > 1 uses OpenMP;
// workers == 1 is the serial reference path.
std::vector<std::vector<SymbolId>> decode_corpus(
    const std::vector<Sequence>& xs, const Wfst& cascade, int workers);

struct EmConfig {
  double alpha = 0.9;    // stepsize exponent: eta_k = (k+2)^(-alpha)
  int minibatch = 10;
  int epochs = 20;
  int train_size = 1000; // N shortest source sequences
  int delay_bound = 2;
  int patience = 3;      // epochs of unchanged row argmax before stopping
};

struct EmState {
  EmissionParams params;
  OpCounts stats;  // decayed sufficient statistics
  long long step = 0;
  double alpha = 0.9;
  int minibatch = 10;
};

// Picks the n shortest sequences (stable on ties).
std::vector<Sequence> select_shortest(const std::vector<Sequence>& corpus,
                                      size_t n);

// One pass of hard stepwise EM over train_x. Decodes each minibatch with
// the current model, marginalizes over alignments of the decoded pairs,
// blends the decayed statistics, and rebuilds the parameters. Sequences
// that fail to decode are skipped with a warning.
EmState em_epoch(const EmState& state, const std::vector<Sequence>& train_x,
                 const Wfst& lm, const PriorSpec& prior,
                 const EmConfig& config, int workers = 1,
                 std::vector<std::string>* warnings = nullptr,
                 double* joint_neglogprob = nullptr,
                 const NGramLm* lm_model = nullptr);

// Runs epochs with early stopping on a stable substitution argmax.
EmState train_channel(const std::vector<Sequence>& train_x, const Wfst& lm,
                      const NGramLm& lm_model, const PriorSpec& prior,
                      int target_syms, int source_syms,
                      const EmConfig& config, int workers = 1,
                      std::function<void(int, const EmState&, double)>
                          epoch_callback = nullptr);

}  // namespace uct
