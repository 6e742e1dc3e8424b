#include "uct/config.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <variant>
#include <vector>

namespace uct {

namespace {

using Field = std::variant<std::string ExperimentConfig::*,
                           int ExperimentConfig::*, double ExperimentConfig::*,
                           unsigned ExperimentConfig::*,
                           bool ExperimentConfig::*>;

struct Entry {
  const char* section;
  const char* key;
  Field field;
};

const std::vector<Entry>& schema() {
  using C = ExperimentConfig;
  static const std::vector<Entry> entries = {
      {"data", "train_source", &C::train_source},
      {"data", "train_target", &C::train_target},
      {"data", "valid_source", &C::valid_source},
      {"data", "valid_target", &C::valid_target},
      {"data", "test_source", &C::test_source},
      {"data", "test_target", &C::test_target},
      {"data", "priors", &C::priors},
      {"data", "addbacks", &C::addbacks},
      {"data", "output_dir", &C::output_dir},
      {"data", "coverage", &C::coverage},
      {"lm", "order", &C::lm_order},
      {"channel", "delay", &C::delay},
      {"channel", "prior_base", &C::prior_base},
      {"channel", "prior_boost", &C::prior_boost},
      {"em", "alpha", &C::em_alpha},
      {"em", "minibatch", &C::em_minibatch},
      {"em", "epochs", &C::em_epochs},
      {"em", "train_size", &C::em_train_size},
      {"em", "patience", &C::em_patience},
      {"neural", "embedding", &C::embedding},
      {"neural", "hidden", &C::hidden},
      {"neural", "seed", &C::seed},
      {"neural", "noise_drop", &C::noise_drop},
      {"neural", "noise_window", &C::noise_window},
      {"neural", "max_epochs", &C::neural_max_epochs},
      {"neural", "anneal_epochs", &C::neural_anneal_epochs},
      {"neural", "ae_floor", &C::neural_ae_floor},
      {"neural", "patience", &C::neural_patience},
      {"neural", "learning_rate", &C::learning_rate},
      {"neural", "lr_decay", &C::lr_decay},
      {"neural", "grad_clip", &C::grad_clip},
      {"neural", "train_size", &C::neural_train_size},
      {"decode", "decoder", &C::decoder},
      {"decode", "beam", &C::beam},
      {"decode", "nbest", &C::nbest},
      {"decode", "normalize_rescore", &C::normalize_rescore},
      {"decode", "workers", &C::workers},
  };
  return entries;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

void assign(ExperimentConfig& config, const Entry& entry,
            const std::string& value, int line) {
  const std::string id =
      "[" + std::string(entry.section) + "]." + entry.key;
  std::visit(
      [&](auto member) {
        using T = std::decay_t<decltype(config.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          config.*member = value;
        } else if constexpr (std::is_same_v<T, bool>) {
          if (value == "true") config.*member = true;
          else if (value == "false") config.*member = false;
          else fail(line, id + " expects true or false, got '" + value + "'");
        } else {
          std::istringstream in(value);
          T parsed{};
          in >> parsed;
          char extra = 0;
          if (in.fail() || (in >> extra))
            fail(line, id + " expects a number, got '" + value + "'");
          config.*member = parsed;
        }
      },
      entry.field);
}

}  // namespace

bool valid_decoder(const std::string& name) {
  return name == "wfst" || name == "seq2seq" || name == "rerank-wfst" ||
         name == "rerank-seq2seq" || name == "poe";
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  bool section_known = true;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      section_known = false;
      for (const auto& e : schema())
        if (section == e.section) section_known = true;
      if (!section_known) fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) fail(line, "key '" + key + "' before any section");
    const Entry* found = nullptr;
    for (const auto& e : schema())
      if (section == e.section && key == e.key) found = &e;
    if (!found) fail(line, "unknown key [" + section + "]." + key);
    assign(config, *found, value, line);
  }
  if (!valid_decoder(config.decoder))
    throw ConfigError("config: unknown decoder '" + config.decoder + "'");
  return config;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& e : schema()) {
    if (section != e.section) {
      if (!section.empty()) out << "\n";
      section = e.section;
      out << "[" << section << "]\n";
    }
    out << e.key << " = ";
    std::visit(
        [&](auto member) {
          using T = std::decay_t<decltype(config.*member)>;
          if constexpr (std::is_same_v<T, bool>) {
            out << (config.*member ? "true" : "false");
          } else if constexpr (std::is_same_v<T, double>) {
            std::ostringstream num;
            num.precision(17);
            num << config.*member;
            out << num.str();
          } else {
            out << config.*member;
          }
        },
        e.field);
    out << "\n";
  }
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = serialize_config(config);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace uct
