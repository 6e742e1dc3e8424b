#include "uct/charlm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uct {

namespace {

std::vector<int> trim_context(const std::vector<int>& context, int order) {
  const size_t max_len = static_cast<size_t>(order > 0 ? order - 1 : 0);
  if (context.size() <= max_len) return context;
  return std::vector<int>(context.end() - max_len, context.end());
}

std::string render_symbol(int s) {
  if (s == NGramLm::kBos) return "<s>";
  return std::to_string(s);
}

int parse_symbol(const std::string& s, int eos) {
  if (s == "<s>") return NGramLm::kBos;
  if (s == "</s>") return eos;
  return std::stoi(s);
}

}  // namespace

double NGramLm::prob(const std::vector<int>& context, int w) const {
  std::vector<int> ctx = trim_context(context, order_);
  double factor = 1.0;
  while (true) {
    auto it = probs_.find(ctx);
    if (it != probs_.end()) {
      auto jt = it->second.find(w);
      if (jt != it->second.end()) return factor * jt->second;
      const double bo = backoff_.at(ctx);
      if (bo == 0.0) return 0.0;
      factor *= bo;
    }
    if (ctx.empty()) return factor * uniform_;
    ctx.erase(ctx.begin());
  }
}

bool NGramLm::observed(const std::vector<int>& context, int w) const {
  auto it = probs_.find(trim_context(context, order_));
  return it != probs_.end() && it->second.count(w) > 0;
}

double NGramLm::sequence_neglogprob(const std::vector<SymbolId>& tokens) const {
  std::vector<int> history(order_ > 1 ? order_ - 1 : 0, kBos);
  double total = 0.0;
  auto step = [&](int w) {
    total += -std::log(prob(history, w));
    if (order_ > 1) {
      history.erase(history.begin());
      history.push_back(w);
    }
  };
  for (SymbolId t : tokens) step(t);
  step(eos_);
  return total;
}

double NGramLm::perplexity(const std::vector<Sequence>& corpus) const {
  double total = 0.0;
  size_t events = 0;
  for (const auto& seq : corpus) {
    total += sequence_neglogprob(seq.tokens);
    events += seq.tokens.size() + 1;
  }
  return std::exp(total / static_cast<double>(events));
}

NGramLm train_lm(const std::vector<Sequence>& corpus, int order,
                 const SmoothingConfig& smoothing, int vocab_size) {
  if (order < 1) throw std::invalid_argument("train_lm: order must be >= 1");
  if (corpus.empty()) throw std::invalid_argument("train_lm: empty corpus");

  NGramLm lm;
  lm.order_ = order;
  lm.vocab_size_ = vocab_size;
  lm.eos_ = vocab_size;  // one past the last alphabet id

  std::map<std::vector<int>, std::map<int, long long>> counts;
  for (const auto& seq : corpus) {
    std::vector<int> history(order - 1, NGramLm::kBos);
    auto observe = [&](int w) {
      for (size_t len = 0; len < static_cast<size_t>(order); ++len) {
        if (len > history.size()) break;
        std::vector<int> ctx(history.end() - len, history.end());
        ++counts[ctx][w];
      }
      if (order > 1) {
        history.erase(history.begin());
        history.push_back(w);
      }
    };
    for (SymbolId t : seq.tokens) observe(t);
    observe(lm.eos_);
  }

  // Events: alphabet ids 1..V-1 plus EOS, so V equiprobable outcomes.
  lm.uniform_ = smoothing.witten_bell
                    ? 1.0 / static_cast<double>(vocab_size)
                    : 0.0;

  // Fill explicit probabilities shortest contexts first so the lower-order
  // interpolation term is already available; map order alone would visit
  // {b,c} before {c}.
  std::vector<std::vector<int>> ctx_order;
  ctx_order.reserve(counts.size());
  for (const auto& [ctx, dist] : counts) ctx_order.push_back(ctx);
  std::stable_sort(ctx_order.begin(), ctx_order.end(),
                   [](const std::vector<int>& a, const std::vector<int>& b) {
                     return a.size() < b.size();
                   });
  for (const auto& ctx : ctx_order) {
    const auto& dist = counts.at(ctx);
    long long n = 0;
    for (const auto& [w, c] : dist) n += c;
    const double types = static_cast<double>(dist.size());
    if (smoothing.witten_bell) {
      const double denom = static_cast<double>(n) + types;
      for (const auto& [w, c] : dist) {
        std::vector<int> lower(ctx);
        double p_lower;
        if (lower.empty()) {
          p_lower = lm.uniform_;
        } else {
          lower.erase(lower.begin());
          p_lower = lm.prob(lower, w);
        }
        lm.probs_[ctx][w] =
            (static_cast<double>(c) + types * p_lower) / denom;
      }
      lm.backoff_[ctx] = types / denom;
    } else {
      for (const auto& [w, c] : dist)
        lm.probs_[ctx][w] =
            static_cast<double>(c) / static_cast<double>(n);
      lm.backoff_[ctx] = 0.0;
    }
  }
  return lm;
}

Wfst compile_lm(const NGramLm& lm) {
  std::map<std::vector<int>, int> state_of;
  for (const auto& [ctx, dist] : lm.probs_) {
    (void)dist;
    state_of.emplace(ctx, 0);
  }
  state_of.emplace(std::vector<int>{}, 0);

  Wfst m(static_cast<int>(state_of.size()));
  m.input_syms = lm.vocab_size();
  m.output_syms = lm.vocab_size();
  int next_id = 0;
  for (auto& [ctx, id] : state_of) id = next_id++;

  auto successor = [&](const std::vector<int>& ctx, int w) {
    std::vector<int> nxt(ctx);
    nxt.push_back(w);
    if (static_cast<int>(nxt.size()) > lm.order() - 1)
      nxt.erase(nxt.begin(),
                nxt.end() - std::max(lm.order() - 1, 0));
    while (!nxt.empty() && state_of.find(nxt) == state_of.end())
      nxt.erase(nxt.begin());
    return state_of.at(nxt);
  };

  for (const auto& [ctx, id] : state_of) {
    auto it = lm.probs_.find(ctx);
    if (it != lm.probs_.end()) {
      for (const auto& [w, p] : it->second) {
        if (w == lm.eos()) continue;
        m.add_arc(id, w, w, -std::log(p), successor(ctx, w));
      }
      const double bo = lm.backoff_.at(ctx);
      if (!ctx.empty() && bo > 0.0) {
        std::vector<int> lower(ctx.begin() + 1, ctx.end());
        while (!lower.empty() && state_of.find(lower) == state_of.end())
          lower.erase(lower.begin());
        m.add_arc(id, Alphabet::kEpsilon, Alphabet::kEpsilon, -std::log(bo),
                  state_of.at(lower));
      }
    }
    if (ctx.empty()) {
      // The root accepts every symbol so that no string has zero support.
      for (int w = 1; w < lm.vocab_size(); ++w) {
        const bool have = it != lm.probs_.end() && it->second.count(w) > 0;
        if (have) continue;
        const double p = lm.prob({}, w);
        if (p <= 0.0) continue;
        m.add_arc(id, w, w, -std::log(p), successor(ctx, w));
      }
    }
    const double p_eos = lm.prob(ctx, lm.eos());
    if (p_eos > 0.0) m.set_final(id, -std::log(p_eos));
  }

  // Start at the fully BOS-padded context when it exists.
  std::vector<int> start_ctx(lm.order() > 1 ? lm.order() - 1 : 0,
                             NGramLm::kBos);
  while (!start_ctx.empty() && state_of.find(start_ctx) == state_of.end())
    start_ctx.erase(start_ctx.begin());
  m.set_start(state_of.at(start_ctx));
  return m;
}

std::string NGramLm::serialize_arpa() const {
  std::ostringstream out;
  char buf[64];
  out << "\\order " << order_ << "\n";
  out << "\\vocab-size " << vocab_size_ << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", uniform_);
  out << "\\uniform " << buf << "\n";
  std::vector<long long> ngram_counts(order_, 0);
  for (const auto& [ctx, dist] : probs_)
    ngram_counts[ctx.size()] += static_cast<long long>(dist.size());
  out << "\\data\\\n";
  for (int n = 1; n <= order_; ++n)
    out << "ngram " << n << "=" << ngram_counts[n - 1] << "\n";
  for (int n = 1; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    for (const auto& [ctx, dist] : probs_) {
      if (static_cast<int>(ctx.size()) != n - 1) continue;
      for (const auto& [w, p] : dist) {
        std::snprintf(buf, sizeof(buf), "%.17g", std::log10(p));
        out << buf << '\t';
        for (int c : ctx) out << render_symbol(c) << ' ';
        out << (w == eos_ ? std::string("</s>") : std::to_string(w)) << '\n';
      }
    }
  }
  // Backoff weights live in their own section: BOS-padded contexts never
  // occur as n-gram lines, so the usual third ARPA column cannot hold them.
  out << "\n\\backoffs:\n";
  for (const auto& [ctx, bo] : backoff_) {
    std::snprintf(buf, sizeof(buf), "%.17g", bo);
    out << buf;
    for (int c : ctx) out << ' ' << render_symbol(c);
    out << '\n';
  }
  out << "\\end\\\n";
  return out.str();
}

NGramLm NGramLm::deserialize_arpa(const std::string& text) {
  NGramLm lm;
  std::istringstream in(text);
  std::string line;
  enum { kNone, kGrams, kBackoffs } section = kNone;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("\\order ", 0) == 0) {
      lm.order_ = std::stoi(line.substr(7));
    } else if (line.rfind("\\vocab-size ", 0) == 0) {
      lm.vocab_size_ = std::stoi(line.substr(12));
      lm.eos_ = lm.vocab_size_;
    } else if (line.rfind("\\uniform ", 0) == 0) {
      lm.uniform_ = std::stod(line.substr(9));
    } else if (line == "\\data\\" || line.rfind("ngram ", 0) == 0) {
      continue;
    } else if (line == "\\backoffs:") {
      section = kBackoffs;
    } else if (line[0] == '\\') {
      section = line.find("-grams:") != std::string::npos ? kGrams : kNone;
    } else if (section == kGrams) {
      std::istringstream ls(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ls, field, '\t')) fields.push_back(field);
      if (fields.size() < 2) throw std::runtime_error("bad arpa line: " + line);
      const double p = std::pow(10.0, std::stod(fields[0]));
      std::istringstream ws(fields[1]);
      std::vector<int> syms;
      std::string tok;
      while (ws >> tok) syms.push_back(parse_symbol(tok, lm.eos_));
      const int w = syms.back();
      syms.pop_back();
      lm.probs_[syms][w] = p;
    } else if (section == kBackoffs) {
      std::istringstream ws(line);
      double bo;
      ws >> bo;
      std::vector<int> ctx;
      std::string tok;
      while (ws >> tok) ctx.push_back(parse_symbol(tok, lm.eos_));
      lm.backoff_[ctx] = bo;
    }
  }
  if (lm.order_ < 1 || lm.vocab_size_ < 1)
    throw std::runtime_error("arpa file missing header");
  for (const auto& [ctx, dist] : lm.probs_) {
    (void)dist;
    if (!lm.backoff_.count(ctx)) lm.backoff_[ctx] = 0.0;
  }
  return lm;
}

void NGramLm::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_arpa();
}

NGramLm NGramLm::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_arpa(ss.str());
}

}  // namespace uct
