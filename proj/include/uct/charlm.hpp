#pragma once

#include <map>
#include <string>
#include <vector>

#include "uct/corpus.hpp"
#include "uct/fst.hpp"

namespace uct {

struct SmoothingConfig {
  bool witten_bell = true;  // false: pure maximum likelihood (tests only)
};

// Character n-gram model with Witten-Bell interpolation backed off down to
// a uniform base distribution. Events are alphabet ids 1..V-1 (UNK
// included, epsilon excluded) plus EOS. Contexts may contain the BOS
// sentinel. Immutable once trained.
class NGramLm {
 public:
  static constexpr int kBos = -1;

  int order() const { return order_; }
  int eos() const { return eos_; }
  int vocab_size() const { return vocab_size_; }  // alphabet size incl. eps

  // Interpolated probability of symbol w (alphabet id or eos()) given the
  // most recent context symbols (oldest first). Strictly positive.
  double prob(const std::vector<int>& context, int w) const;

  // Sum of -log p over the sentence including the EOS term.
  double sequence_neglogprob(const std::vector<SymbolId>& tokens) const;

  double perplexity(const std::vector<Sequence>& corpus) const;

  // Whether (context, w) has an explicit entry (no backoff fires).
  bool observed(const std::vector<int>& context, int w) const;

  std::string serialize_arpa() const;
  static NGramLm deserialize_arpa(const std::string& text);
  void save(const std::string& path) const;
  static NGramLm load(const std::string& path);

  friend NGramLm train_lm(const std::vector<Sequence>& corpus, int order,
                          const SmoothingConfig& smoothing, int vocab_size);
  friend Wfst compile_lm(const NGramLm& lm);

 private:
  int order_ = 0;
  int eos_ = 0;
  int vocab_size_ = 0;
  // Explicit interpolated probabilities and backoff mass per context.
  std::map<std::vector<int>, std::map<int, double>> probs_;
  std::map<std::vector<int>, double> backoff_;
  double uniform_ = 0.0;  // base distribution value
};

// Trains an order-n model; vocab_size is the alphabet size (ids 1..V-1
// are events). Throws on an empty corpus or order < 1.
NGramLm train_lm(const std::vector<Sequence>& corpus, int order,
                 const SmoothingConfig& smoothing, int vocab_size);

// Compiles the model into a weighted acceptor whose tropical path weight
// for y is -log P(y) including EOS. Backoff is realized with epsilon arcs,
// which is exact for strings whose every n-gram was observed and a
// documented approximation otherwise.
Wfst compile_lm(const NGramLm& lm);

}  // namespace uct
