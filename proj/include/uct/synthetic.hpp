#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "uct/alphabet.hpp"

namespace uct {

// Deterministic synthetic substitution-cipher task: sentences sampled from
// a seeded order-3 character process over a small alphabet, enciphered
// with a known 1:1 mapping. Used by the test fixtures and the bundled
// demo experiment.
struct CipherFixture {
  std::vector<std::string> target_train;  // native-script monolingual
  std::vector<std::string> source_train;  // enciphered monolingual
  std::vector<std::string> test_source;   // parallel test, source side
  std::vector<std::string> test_target;   // parallel test, target side
  std::vector<std::string> valid_source;  // parallel validation
  std::vector<std::string> valid_target;
  std::map<char, char> cipher;            // target char -> source char
  std::string symbols;                    // the underlying symbol set
  // Noisy informative prior pairs, mimicking a phonetic keyboard layout:
  // most true mappings plus a few spurious ones, some rows missing.
  std::vector<std::pair<char, char>> prior_pairs;
};

struct CipherFixtureConfig {
  unsigned seed = 13;
  int n_target_train = 1500;
  int n_source_train = 1500;
  int n_valid = 30;
  int n_test = 100;
  int min_words = 3;
  int max_words = 6;
  bool fix_space = true;     // cipher maps space to space
  int n_permuted = -1;       // letters moved by the cipher; rest map to
                             // themselves (-1 = permute all, the hard case;
                             // small values mimic closely related scripts)
  int prior_missing = 1;     // true pairs left out of the prior
  double prior_decoy = 0.3;  // chance of an extra wrong pair per char
};

CipherFixture make_cipher_fixture(const CipherFixtureConfig& config);

// Writes the fixture as pipeline-ready corpus files under dir.
void write_cipher_fixture(const CipherFixture& fixture,
                          const std::string& dir);

}  // namespace uct
