#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "uct/autodiff.hpp"
#include "uct/corpus.hpp"

namespace uct {

enum class Domain { Source, Target };

struct Direction {
  Domain from;
  Domain to;
};

inline constexpr Direction kSourceToTarget{Domain::Source, Domain::Target};
inline constexpr Direction kTargetToSource{Domain::Target, Domain::Source};

struct Seq2SeqConfig {
  int vocab_size = 0;  // char ids live in [0, vocab_size); EOS = vocab_size
  int embedding = 32;
  int hidden = 64;
  unsigned seed = 1;
};

struct NoiseConfig {
  double drop = 0.1;  // per-char deletion probability
  int window = 3;     // local shuffle window
};

struct TrainSchedule {
  int max_epochs = 30;
  int anneal_epochs = 3;   // autoencoding weight anneals linearly over these
  double ae_floor = 0.1;   // and stays at this weight afterwards
  int patience = 10;       // epochs without validation CER improvement
  double learning_rate = 0.05;
  double lr_decay = 1.0;   // multiplicative per-epoch decay
  double clip = 5.0;       // gradient-norm clip
};

struct TrainReport {
  int epochs_run = 0;
  double best_val_cer = 0.0;
  std::vector<double> val_cer_history;
};

// Single-layer GRU encoder-decoder with dot-product attention, shared
// across domains; a domain tag prepended to the encoder input and used as
// the decoder start token selects the output domain.
class Seq2SeqModel {
 public:
  Seq2SeqModel() = default;
  explicit Seq2SeqModel(const Seq2SeqConfig& config);

  int vocab_size() const { return config_.vocab_size; }
  int eos() const { return config_.vocab_size; }
  const Seq2SeqConfig& config() const { return config_; }

  // p(y_{t+1} = o | x, y_prefix); indices 0..vocab_size with EOS last,
  // epsilon (id 0) masked out. Sums to 1.
  std::vector<double> next_char_dist(const std::vector<SymbolId>& x,
                                     const std::vector<SymbolId>& y_prefix,
                                     Direction dir) const;

  // Argmax decoding, capped at |x| output characters.
  std::vector<SymbolId> greedy_decode(const std::vector<SymbolId>& x,
                                      Direction dir) const;

  // sum_t -log p(y_t | x, y_{1:t-1}) - log p(EOS | x, y).
  double sequence_neglogprob(const std::vector<SymbolId>& x,
                             const std::vector<SymbolId>& y,
                             Direction dir) const;

  // Tape-built loss (identical in value to sequence_neglogprob).
  double forward_loss(const std::vector<SymbolId>& x,
                      const std::vector<SymbolId>& y, Direction dir) const;

  // Forward + backward; adds weight * dLoss/dParam into the grad buffers.
  double accumulate_gradients(const std::vector<SymbolId>& x,
                              const std::vector<SymbolId>& y, Direction dir,
                              double weight = 1.0);

  // Clips the global gradient norm and applies one SGD step; zeroes grads.
  void sgd_step(double learning_rate, double clip);
  void zero_grads();

  std::vector<ad::Mat>& params() { return params_; }
  const std::vector<ad::Mat>& params() const { return params_; }
  const std::vector<ad::Mat>& grads() const { return grads_; }

  std::string manifest() const;
  void save(const std::string& path) const;
  static Seq2SeqModel load(const std::string& path);

 private:
  struct Forward;

  Seq2SeqConfig config_;
  std::vector<ad::Mat> params_;
  std::vector<ad::Mat> grads_;
};

// Char-drop plus bounded local shuffle, seeded.
std::vector<SymbolId> apply_noise(const std::vector<SymbolId>& tokens,
                                  const NoiseConfig& noise,
                                  std::mt19937& rng);

// Denoising autoencoding + on-the-fly back-translation. valid holds
// (source, target) pairs scored by greedy source-to-target CER. Returns
// the best model by validation CER. Throws on a non-finite loss.
Seq2SeqModel train_unmt(const std::vector<Sequence>& source_corpus,
                        const std::vector<Sequence>& target_corpus,
                        const Seq2SeqConfig& config, const NoiseConfig& noise,
                        const TrainSchedule& schedule,
                        const std::vector<std::pair<Sequence, Sequence>>& valid,
                        TrainReport* report = nullptr);

}  // namespace uct
