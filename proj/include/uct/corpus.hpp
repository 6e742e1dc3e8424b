#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uct/alphabet.hpp"

namespace uct {

// A tokenized sentence: alphabet ids plus the original string.
struct Sequence {
  std::vector<SymbolId> tokens;
  std::string raw;
};

enum class SplitRole { TrainSource, TrainTarget, Validation, Test };

struct CorpusSplit {
  SplitRole role;
  std::vector<Sequence> sequences;
};

// Lowercases and segments a UTF-8 string into per-codepoint tokens,
// interning codepoints into the alphabet. Combining marks and non-printing
// characters become separate tokens. Throws Utf8Error on malformed input.
Sequence tokenize(const std::string& text, Alphabet& alphabet);

// Tokenizes without touching the alphabet: unseen codepoints map to UNK.
Sequence tokenize_fixed(const std::string& text, const Alphabet& alphabet);

// Detokenizes ids back to a string, skipping epsilon and UNK.
std::string detokenize(const std::vector<SymbolId>& tokens,
                       const Alphabet& alphabet);

// Builds the smallest frequency-ranked alphabet whose cumulative token
// frequency reaches `coverage`, plus the standard add-backs and the
// reserved sentinels. Ties at the coverage boundary are all included.
Alphabet induce_alphabet(const std::vector<std::string>& train_lines,
                         double coverage,
                         const std::set<Codepoint>& standard_addbacks);

// Replaces out-of-alphabet tokens with UNK. Target-side test data is kept
// intact when is_target_test is set.
Sequence apply_unk(const Sequence& seq, const Alphabet& alphabet,
                   bool is_target_test = false);

// Reads a one-sentence-per-line UTF-8 file. Throws on I/O failure.
std::vector<std::string> read_lines(const std::string& path);

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines);

// Parses an add-back file: one codepoint per line, either a literal
// character or "U+XXXX"; '#' comments and blank lines allowed.
std::set<Codepoint> read_addbacks(const std::string& path);

}  // namespace uct
