#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "uct/unicode.hpp"

namespace uct {

using SymbolId = int;

// Ordered symbol table over Unicode codepoints. Ids 0 and 1 are reserved
// for epsilon and UNK; neither is ever produced by tokenizing raw text.
class Alphabet {
 public:
  static constexpr SymbolId kEpsilon = 0;
  static constexpr SymbolId kUnk = 1;

  Alphabet();

  // Adds a codepoint if absent; returns its id either way.
  SymbolId add(Codepoint cp);

  // Returns the id of cp, or kUnk when not in the table.
  SymbolId lookup(Codepoint cp) const;

  bool contains(Codepoint cp) const;

  // Codepoint for a regular symbol id; throws for epsilon/UNK.
  Codepoint codepoint(SymbolId id) const;

  // Printable form of any id (epsilon -> "<eps>", UNK -> "<unk>").
  std::string symbol_string(SymbolId id) const;

  size_t size() const { return symbols_.size(); }

  // One "U+XXXX" line per symbol in id order; lines 0 and 1 are the
  // reserved sentinels.
  std::string serialize() const;
  static Alphabet deserialize(const std::string& text);

  void save(const std::string& path) const;
  static Alphabet load(const std::string& path);

 private:
  std::vector<Codepoint> symbols_;  // [0] and [1] hold dummy values
  std::unordered_map<Codepoint, SymbolId> index_;
};

}  // namespace uct
