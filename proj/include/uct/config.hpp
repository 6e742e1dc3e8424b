#pragma once

#include <stdexcept>
#include <string>

namespace uct {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Experiment settings, read from an INI-style file of `[section]` headers
// and `key = value` lines. Defaults follow the bundled demo experiment.
struct ExperimentConfig {
  // [data]
  std::string train_source;
  std::string train_target;
  std::string valid_source;
  std::string valid_target;
  std::string test_source;
  std::string test_target;
  std::string priors;       // optional TSV of similar character pairs
  std::string addbacks;     // optional add-back codepoint list
  std::string output_dir = "out";
  double coverage = 1.0;    // alphabet cumulative-frequency coverage

  // [lm]
  int lm_order = 6;

  // [channel]
  int delay = 2;
  double prior_base = 0.01;
  double prior_boost = 2.0;

  // [em]
  double em_alpha = 0.9;
  int em_minibatch = 10;
  int em_epochs = 20;
  int em_train_size = 1000;  // N shortest source sentences
  int em_patience = 3;

  // [neural]
  int embedding = 32;
  int hidden = 64;
  unsigned seed = 1;
  double noise_drop = 0.1;
  int noise_window = 3;
  int neural_max_epochs = 30;
  int neural_anneal_epochs = 3;
  double neural_ae_floor = 0.1;
  int neural_patience = 10;
  double learning_rate = 0.05;
  double lr_decay = 1.0;
  double grad_clip = 5.0;
  int neural_train_size = 1000;

  // [decode]
  std::string decoder = "wfst";  // wfst | seq2seq | rerank-wfst |
                                 // rerank-seq2seq | poe
  int beam = 5;
  int nbest = 5;
  bool normalize_rescore = false;
  int workers = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

bool valid_decoder(const std::string& name);

// Parses the file (or raw text); unknown sections/keys and malformed
// values raise ConfigError with a line diagnostic. An empty file yields
// all defaults.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Canonical round-trippable rendering: parse(serialize(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// FNV-1a hash of the canonical serialization, as fixed-width hex.
std::string config_hash(const ExperimentConfig& config);

}  // namespace uct
