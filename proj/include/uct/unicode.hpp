#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace uct {

using Codepoint = uint32_t;

struct Utf8Error : std::runtime_error {
  size_t byte_offset;
  explicit Utf8Error(size_t offset)
      : std::runtime_error("invalid UTF-8 at byte offset " +
                           std::to_string(offset)),
        byte_offset(offset) {}
};

// Decodes a UTF-8 string into codepoints. Throws Utf8Error on malformed
// input, naming the byte offset of the offending byte.
std::vector<Codepoint> utf8_decode(const std::string& text);

std::string utf8_encode(Codepoint cp);
std::string utf8_encode(const std::vector<Codepoint>& cps);

// Simple full-string lowercasing over the ranges this project cares about
// (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic). Locale-specific
// casing rules are not applied.
Codepoint to_lower(Codepoint cp);

bool is_whitespace(Codepoint cp);

// Punctuation for word tokenization purposes. Intra-word hyphens and
// apostrophes are handled by the tokenizer, not here.
bool is_punctuation(Codepoint cp);

}  // namespace uct
