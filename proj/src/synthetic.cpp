#include "uct/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "uct/corpus.hpp"

namespace uct {

namespace {

// Order-3 letter process: transition logits drawn once from the seeded
// generator, then sharpened so the language has enough structure for the
// decipherment signal to be identifiable.
class LetterProcess {
 public:
  LetterProcess(const std::string& letters, std::mt19937& rng)
      : letters_(letters) {
    const size_t k = letters.size();
    std::gamma_distribution<double> gamma(0.3, 1.0);
    table_.assign(k * k, std::vector<double>(k, 0.0));
    for (auto& row : table_) {
      double total = 0.0;
      for (auto& v : row) {
        v = gamma(rng) + 1e-4;
        total += v;
      }
      for (auto& v : row) v /= total;
    }
    init_.assign(k, 0.0);
    double total = 0.0;
    for (auto& v : init_) {
      v = gamma(rng) + 1e-4;
      total += v;
    }
    for (auto& v : init_) v /= total;
  }

  std::string word(int len, std::mt19937& rng) const {
    const size_t k = letters_.size();
    std::string w;
    size_t prev2 = 0, prev1 = 0;
    for (int i = 0; i < len; ++i) {
      const std::vector<double>& dist =
          i == 0 ? init_ : table_[prev2 * k + prev1];
      std::discrete_distribution<size_t> pick(dist.begin(), dist.end());
      const size_t c = pick(rng);
      w += letters_[c];
      prev2 = i == 0 ? c : prev1;
      prev1 = c;
    }
    return w;
  }

 private:
  std::string letters_;
  std::vector<std::vector<double>> table_;  // (prev2, prev1) -> next
  std::vector<double> init_;
};

}  // namespace

CipherFixture make_cipher_fixture(const CipherFixtureConfig& config) {
  CipherFixture fx;
  const std::string letters = "abcdefghijklmn";  // 14 letters + space = 15
  fx.symbols = letters + ' ';

  std::mt19937 rng(config.seed);
  LetterProcess process(letters, rng);

  std::uniform_int_distribution<int> n_words(config.min_words,
                                             config.max_words);
  std::uniform_int_distribution<int> word_len(2, 6);
  auto sentence = [&]() {
    std::string s;
    const int n = n_words(rng);
    for (int i = 0; i < n; ++i) {
      if (i > 0) s += ' ';
      s += process.word(word_len(rng), rng);
    }
    return s;
  };

  // 1:1 cipher over the symbol set
  if (config.n_permuted < 0 ||
      config.n_permuted >= static_cast<int>(letters.size())) {
    std::string shuffled = letters;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (size_t i = 0; i < letters.size(); ++i)
      fx.cipher[letters[i]] = shuffled[i];
  } else {
    // move only n_permuted letters: a random subset mapped cyclically,
    // everything else to itself
    for (char c : letters) fx.cipher[c] = c;
    std::string subset = letters;
    std::shuffle(subset.begin(), subset.end(), rng);
    subset.resize(config.n_permuted);
    for (int i = 0; i + 1 < config.n_permuted; ++i)
      fx.cipher[subset[i]] = subset[i + 1];
    if (config.n_permuted >= 2)
      fx.cipher[subset[config.n_permuted - 1]] = subset[0];
  }
  if (config.fix_space) {
    fx.cipher[' '] = ' ';
  } else {
    // fold space into the permutation by swapping with a random letter
    std::uniform_int_distribution<size_t> pick(0, letters.size() - 1);
    const char partner = letters[pick(rng)];
    fx.cipher[' '] = fx.cipher[partner];
    fx.cipher[partner] = ' ';
  }
  // Informative but noisy similarity pairs, like a keyboard layout would
  // give: drop a few true mappings, add occasional spurious ones.
  {
    std::vector<char> order(letters.begin(), letters.end());
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<size_t> pick(0, letters.size() - 1);
    for (size_t i = 0; i < order.size(); ++i) {
      const char t = order[i];
      if (static_cast<int>(i) >= config.prior_missing)
        fx.prior_pairs.emplace_back(t, fx.cipher.at(t));
      if (coin(rng) < config.prior_decoy) {
        const char decoy = fx.cipher.at(letters[pick(rng)]);
        if (decoy != fx.cipher.at(t)) fx.prior_pairs.emplace_back(t, decoy);
      }
    }
    std::sort(fx.prior_pairs.begin(), fx.prior_pairs.end());
  }

  auto encipher = [&](const std::string& s) {
    std::string out;
    for (char c : s) out += fx.cipher.at(c);
    return out;
  };

  for (int i = 0; i < config.n_target_train; ++i)
    fx.target_train.push_back(sentence());
  for (int i = 0; i < config.n_source_train; ++i)
    fx.source_train.push_back(encipher(sentence()));
  for (int i = 0; i < config.n_valid; ++i) {
    const std::string t = sentence();
    fx.valid_target.push_back(t);
    fx.valid_source.push_back(encipher(t));
  }
  for (int i = 0; i < config.n_test; ++i) {
    const std::string t = sentence();
    fx.test_target.push_back(t);
    fx.test_source.push_back(encipher(t));
  }
  return fx;
}

void write_cipher_fixture(const CipherFixture& fixture,
                          const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto at = [&](const std::string& name) { return dir + "/" + name; };
  write_lines(at("train.source.txt"), fixture.source_train);
  write_lines(at("train.target.txt"), fixture.target_train);
  write_lines(at("valid.source.txt"), fixture.valid_source);
  write_lines(at("valid.target.txt"), fixture.valid_target);
  write_lines(at("test.source.txt"), fixture.test_source);
  write_lines(at("test.target.txt"), fixture.test_target);
  std::vector<std::string> cipher_lines;
  for (const auto& [t, s] : fixture.cipher)
    cipher_lines.push_back(std::string(1, t) + "\t" + std::string(1, s));
  write_lines(at("cipher.tsv"), cipher_lines);
  std::vector<std::string> prior_lines = {
      "# noisy similarity pairs for the synthetic task"};
  for (const auto& [t, s] : fixture.prior_pairs)
    prior_lines.push_back(std::string(1, t) + "\t" + std::string(1, s));
  write_lines(at("priors.tsv"), prior_lines);
  std::vector<std::string> addback;
  for (char c : fixture.symbols)
    addback.push_back(c == ' ' ? "U+0020" : std::string(1, c));
  write_lines(at("addbacks.txt"), addback);
}

}  // namespace uct
