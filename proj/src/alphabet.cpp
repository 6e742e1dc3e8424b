#include "uct/alphabet.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uct {

Alphabet::Alphabet() {
  symbols_.push_back(0);  // epsilon sentinel
  symbols_.push_back(0);  // UNK sentinel
}

SymbolId Alphabet::add(Codepoint cp) {
  auto it = index_.find(cp);
  if (it != index_.end()) return it->second;
  const SymbolId id = static_cast<SymbolId>(symbols_.size());
  symbols_.push_back(cp);
  index_.emplace(cp, id);
  return id;
}

SymbolId Alphabet::lookup(Codepoint cp) const {
  auto it = index_.find(cp);
  return it == index_.end() ? kUnk : it->second;
}

bool Alphabet::contains(Codepoint cp) const { return index_.count(cp) > 0; }

Codepoint Alphabet::codepoint(SymbolId id) const {
  if (id <= kUnk || static_cast<size_t>(id) >= symbols_.size())
    throw std::out_of_range("no codepoint for symbol id " +
                            std::to_string(id));
  return symbols_[id];
}

std::string Alphabet::symbol_string(SymbolId id) const {
  if (id == kEpsilon) return "<eps>";
  if (id == kUnk) return "<unk>";
  return utf8_encode(codepoint(id));
}

std::string Alphabet::serialize() const {
  std::string out = "<eps>\n<unk>\n";
  char buf[16];
  for (size_t i = 2; i < symbols_.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "U+%04X\n", symbols_[i]);
    out += buf;
  }
  return out;
}

Alphabet Alphabet::deserialize(const std::string& text) {
  Alphabet a;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    if (lineno == 0 && line != "<eps>")
      throw std::runtime_error("alphabet line 0 must be <eps>");
    if (lineno == 1 && line != "<unk>")
      throw std::runtime_error("alphabet line 1 must be <unk>");
    if (lineno >= 2) {
      if (line.rfind("U+", 0) != 0)
        throw std::runtime_error("bad alphabet line: " + line);
      a.add(static_cast<Codepoint>(std::stoul(line.substr(2), nullptr, 16)));
    }
    ++lineno;
  }
  if (lineno < 2) throw std::runtime_error("alphabet file truncated");
  return a;
}

void Alphabet::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize();
}

Alphabet Alphabet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace uct
