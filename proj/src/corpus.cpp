#include "uct/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

namespace uct {

Sequence tokenize(const std::string& text, Alphabet& alphabet) {
  Sequence seq;
  seq.raw = text;
  for (Codepoint cp : utf8_decode(text))
    seq.tokens.push_back(alphabet.add(to_lower(cp)));
  return seq;
}

Sequence tokenize_fixed(const std::string& text, const Alphabet& alphabet) {
  Sequence seq;
  seq.raw = text;
  for (Codepoint cp : utf8_decode(text))
    seq.tokens.push_back(alphabet.lookup(to_lower(cp)));
  return seq;
}

std::string detokenize(const std::vector<SymbolId>& tokens,
                       const Alphabet& alphabet) {
  std::string out;
  for (SymbolId id : tokens) {
    if (id == Alphabet::kEpsilon || id == Alphabet::kUnk) continue;
    out += utf8_encode(alphabet.codepoint(id));
  }
  return out;
}

Alphabet induce_alphabet(const std::vector<std::string>& train_lines,
                         double coverage,
                         const std::set<Codepoint>& standard_addbacks) {
  if (train_lines.empty())
    throw std::invalid_argument("induce_alphabet: empty corpus");
  if (!(coverage > 0.0 && coverage <= 1.0))
    throw std::invalid_argument("induce_alphabet: coverage must be in (0,1]");

  std::map<Codepoint, long long> freq;  // ordered for determinism
  long long total = 0;
  for (const auto& line : train_lines) {
    for (Codepoint cp : utf8_decode(line)) {
      ++freq[to_lower(cp)];
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("induce_alphabet: empty corpus");

  std::vector<std::pair<Codepoint, long long>> ranked(freq.begin(),
                                                      freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });

  Alphabet alphabet;
  long long cum = 0;
  bool reached = false;
  long long boundary_count = -1;
  for (const auto& [cp, count] : ranked) {
    if (reached && count != boundary_count) break;
    alphabet.add(cp);
    cum += count;
    // include all characters tied with the one that crossed the threshold
    if (!reached &&
        static_cast<double>(cum) >= coverage * static_cast<double>(total)) {
      reached = true;
      boundary_count = count;
    }
  }
  for (Codepoint cp : standard_addbacks) alphabet.add(to_lower(cp));
  return alphabet;
}

Sequence apply_unk(const Sequence& seq, const Alphabet& alphabet,
                   bool is_target_test) {
  if (is_target_test) return seq;
  Sequence out;
  out.raw = seq.raw;
  out.tokens.reserve(seq.tokens.size());
  for (SymbolId id : seq.tokens) {
    if (id == Alphabet::kUnk || id == Alphabet::kEpsilon ||
        static_cast<size_t>(id) >= alphabet.size()) {
      out.tokens.push_back(Alphabet::kUnk);
    } else {
      out.tokens.push_back(id);
    }
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& line : lines) out << line << '\n';
}

std::set<Codepoint> read_addbacks(const std::string& path) {
  std::set<Codepoint> cps;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("U+", 0) == 0) {
      cps.insert(static_cast<Codepoint>(
          std::stoul(line.substr(2), nullptr, 16)));
    } else {
      auto decoded = utf8_decode(line);
      if (!decoded.empty()) cps.insert(decoded[0]);
    }
  }
  return cps;
}

}  // namespace uct
