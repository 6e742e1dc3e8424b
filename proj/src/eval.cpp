#include "uct/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "uct/unicode.hpp"

namespace uct {

namespace {

std::string sig6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

template <typename T>
long long edit_distance_impl(const std::vector<T>& hyp,
                             const std::vector<T>& ref) {
  const size_t m = ref.size(), n = hyp.size();
  std::vector<long long> prev(n + 1), cur(n + 1);
  for (size_t j = 0; j <= n; ++j) prev[j] = static_cast<long long>(j);
  for (size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<long long>(i);
    for (size_t j = 1; j <= n; ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[n];
}

// One minimum-cost alignment as (ref index or -1, hyp index or -1) steps.
// Tie order on the traceback: substitution, deletion, insertion.
template <typename T>
std::vector<std::pair<int, int>> align_impl(const std::vector<T>& hyp,
                                            const std::vector<T>& ref) {
  const size_t m = ref.size(), n = hyp.size();
  std::vector<std::vector<long long>> d(m + 1,
                                        std::vector<long long>(n + 1, 0));
  for (size_t i = 0; i <= m; ++i) d[i][0] = static_cast<long long>(i);
  for (size_t j = 0; j <= n; ++j) d[0][j] = static_cast<long long>(j);
  for (size_t i = 1; i <= m; ++i)
    for (size_t j = 1; j <= n; ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] +
                              (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
  std::vector<std::pair<int, int>> steps;
  size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      steps.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
      --i, --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      steps.emplace_back(static_cast<int>(i - 1), -1);  // deletion
      --i;
    } else {
      steps.emplace_back(-1, static_cast<int>(j - 1));  // insertion
      --j;
    }
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

bool attached_mark(const std::vector<Codepoint>& cps, size_t i) {
  const Codepoint cp = cps[i];
  if (cp != '-' && cp != '\'' && cp != 0x2019) return false;
  return i > 0 && i + 1 < cps.size() && !is_punctuation(cps[i - 1]) &&
         !is_punctuation(cps[i + 1]);
}

// n-gram counting for BLEU.
std::map<std::vector<std::string>, long long> ngram_counts(
    const std::vector<std::string>& words, int n) {
  std::map<std::vector<std::string>, long long> counts;
  if (static_cast<int>(words.size()) < n) return counts;
  for (size_t i = 0; i + n <= words.size(); ++i)
    ++counts[std::vector<std::string>(words.begin() + i,
                                      words.begin() + i + n)];
  return counts;
}

std::string render_codepoint(Codepoint cp) {
  if (cp == 0) return "<eps>";
  if ((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
      (cp >= 'A' && cp <= 'Z'))
    return std::string(1, static_cast<char>(cp));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "U+%04X", cp);
  return buf;
}

}  // namespace

long long edit_distance(const std::vector<SymbolId>& hyp,
                        const std::vector<SymbolId>& ref) {
  return edit_distance_impl(hyp, ref);
}

double cer(const std::vector<SymbolId>& hyp, const std::vector<SymbolId>& ref) {
  if (ref.empty()) throw std::invalid_argument("cer: empty reference");
  return static_cast<double>(edit_distance_impl(hyp, ref)) /
         static_cast<double>(ref.size());
}

double cer(const std::string& hyp, const std::string& ref) {
  const auto h = utf8_decode(hyp), r = utf8_decode(ref);
  if (r.empty()) throw std::invalid_argument("cer: empty reference");
  return static_cast<double>(edit_distance_impl(h, r)) /
         static_cast<double>(r.size());
}

double wer(const std::string& hyp, const std::string& ref) {
  const auto h = word_tokenize(hyp), r = word_tokenize(ref);
  if (r.empty()) throw std::invalid_argument("wer: empty reference");
  return static_cast<double>(edit_distance_impl(h, r)) /
         static_cast<double>(r.size());
}

std::vector<std::string> word_tokenize(const std::string& s) {
  const auto cps = utf8_decode(s);
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < cps.size()) {
    if (is_whitespace(cps[i])) {
      ++i;
      continue;
    }
    // chunk bounds: up to the next whitespace
    size_t end = i;
    while (end < cps.size() && !is_whitespace(cps[end])) ++end;
    std::vector<Codepoint> chunk(cps.begin() + i, cps.begin() + end);
    size_t j = 0;
    while (j < chunk.size()) {
      const bool punct =
          is_punctuation(chunk[j]) && !attached_mark(chunk, j);
      size_t k = j;
      while (k < chunk.size() &&
             (is_punctuation(chunk[k]) && !attached_mark(chunk, k)) == punct)
        ++k;
      tokens.push_back(utf8_encode(
          std::vector<Codepoint>(chunk.begin() + j, chunk.begin() + k)));
      j = k;
    }
    i = end;
  }
  return tokens;
}

double bleu4(const std::vector<std::string>& hyps,
             const std::vector<std::string>& refs) {
  if (hyps.size() != refs.size())
    throw std::invalid_argument("bleu4: corpus size mismatch");
  long long hyp_len = 0, ref_len = 0;
  long long matched[4] = {0, 0, 0, 0}, total[4] = {0, 0, 0, 0};
  for (size_t i = 0; i < hyps.size(); ++i) {
    const auto h = word_tokenize(hyps[i]);
    const auto r = word_tokenize(refs[i]);
    hyp_len += static_cast<long long>(h.size());
    ref_len += static_cast<long long>(r.size());
    for (int n = 1; n <= 4; ++n) {
      const auto hc = ngram_counts(h, n);
      const auto rc = ngram_counts(r, n);
      for (const auto& [gram, c] : hc) {
        total[n - 1] += c;
        auto it = rc.find(gram);
        if (it != rc.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_precision = 0.0;
  for (int n = 0; n < 4; ++n) {
    if (matched[n] == 0 || total[n] == 0) return 0.0;
    log_precision += std::log(static_cast<double>(matched[n]) /
                              static_cast<double>(total[n]));
  }
  const double bp =
      hyp_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) /
                               static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_precision / 4.0);
}

std::vector<std::pair<SymbolId, SymbolId>> align_chars(
    const std::vector<SymbolId>& hyp, const std::vector<SymbolId>& ref) {
  std::vector<std::pair<SymbolId, SymbolId>> out;
  for (const auto& [ri, hi] : align_impl(hyp, ref))
    out.emplace_back(ri < 0 ? Alphabet::kEpsilon : ref[ri],
                     hi < 0 ? Alphabet::kEpsilon : hyp[hi]);
  return out;
}

long long ConfusionMatrix::total() const {
  long long t = 0;
  for (const auto& [key, c] : counts) t += c;
  return t;
}

long long WordCerHistogram::total() const {
  long long t = overflow;
  for (long long c : counts) t += c;
  return t;
}

ErrorProfile error_profile(
    const std::vector<std::pair<std::string, std::string>>& hyp_ref,
    const std::set<std::string>& train_vocab, int top_k, double cer_cap,
    int bins) {
  if (hyp_ref.empty())
    throw std::invalid_argument("error_profile: empty corpus");
  ErrorProfile prof;
  prof.histogram.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b)
    prof.histogram.edges[b] = cer_cap * b / bins;
  prof.histogram.counts.assign(bins, 0);

  long long char_dist = 0, char_ref_len = 0;
  long long word_dist = 0, word_ref_len = 0;
  long long hyp_words = 0, hyp_words_in_vocab = 0;
  std::map<std::pair<std::string, std::string>, long long> subst_types;
  std::vector<std::string> hyps, refs;

  auto bin_of = [&](double c) -> long long* {
    if (c > cer_cap) return &prof.histogram.overflow;
    int b = static_cast<int>(c / cer_cap * bins);
    if (b >= bins) b = bins - 1;  // the cap itself lands in the last bin
    return &prof.histogram.counts[b];
  };

  for (const auto& [hyp, ref] : hyp_ref) {
    const auto h = utf8_decode(hyp), r = utf8_decode(ref);
    if (r.empty()) throw std::invalid_argument("error_profile: empty reference");
    hyps.push_back(hyp);
    refs.push_back(ref);

    for (const auto& [ri, hi] : align_impl(h, r)) {
      const Codepoint rc = ri < 0 ? 0 : r[ri];
      const Codepoint hc = hi < 0 ? 0 : h[hi];
      ++prof.confusion.counts[{rc, hc}];
      if (ri < 0) ++prof.report.char_ins;
      else if (hi < 0) ++prof.report.char_del;
      else if (rc == hc) ++prof.report.char_match;
      else ++prof.report.char_sub;
    }
    char_dist += edit_distance_impl(h, r);
    char_ref_len += static_cast<long long>(r.size());

    const auto hw = word_tokenize(hyp), rw = word_tokenize(ref);
    word_dist += edit_distance_impl(hw, rw);
    word_ref_len += static_cast<long long>(rw.size());
    hyp_words += static_cast<long long>(hw.size());
    for (const auto& w : hw)
      if (train_vocab.count(w)) ++hyp_words_in_vocab;

    for (const auto& [ri, hi] : align_impl(hw, rw)) {
      if (ri < 0) {
        ++prof.report.word_ins;
        ++prof.histogram.overflow;  // hyp word with no reference mate
        continue;
      }
      if (hi < 0) {
        ++prof.report.word_del;
        ++*bin_of(1.0);  // reference word entirely lost
        continue;
      }
      if (rw[ri] == hw[hi]) ++prof.report.word_match;
      else {
        ++prof.report.word_sub;
        ++subst_types[{rw[ri], hw[hi]}];
      }
      ++*bin_of(cer(hw[hi], rw[ri]));
    }
  }

  prof.report.cer = static_cast<double>(char_dist) /
                    static_cast<double>(char_ref_len);
  prof.report.wer = static_cast<double>(word_dist) /
                    static_cast<double>(word_ref_len);
  prof.report.bleu = bleu4(hyps, refs);
  const long long edits =
      prof.report.char_sub + prof.report.char_ins + prof.report.char_del;
  prof.report.insdel_share =
      edits == 0 ? 0.0
                 : static_cast<double>(prof.report.char_ins +
                                       prof.report.char_del) /
                       static_cast<double>(edits);
  prof.in_vocab_rate =
      hyp_words == 0 ? 0.0
                     : static_cast<double>(hyp_words_in_vocab) /
                           static_cast<double>(hyp_words);

  // substitution types: top K by frequency, ties at rank K included
  std::vector<std::pair<std::pair<std::string, std::string>, long long>>
      types(subst_types.begin(), subst_types.end());
  std::sort(types.begin(), types.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  prof.subst.k = top_k;
  for (const auto& [type, c] : types) prof.subst.total_subs += c;
  long long cutoff = -1;
  if (static_cast<int>(types.size()) > top_k) cutoff = types[top_k - 1].second;
  for (size_t i = 0; i < types.size(); ++i) {
    if (static_cast<int>(i) >= top_k && types[i].second != cutoff) break;
    prof.subst.top_types.push_back(types[i]);
    prof.subst.covered += types[i].second;
  }
  prof.subst.coverage =
      prof.subst.total_subs == 0
          ? 1.0
          : static_cast<double>(prof.subst.covered) /
                static_cast<double>(prof.subst.total_subs);
  return prof;
}

std::vector<double> channel_row_entropies(const EmissionParams& params) {
  std::vector<double> out(params.target_syms(), 0.0);
  for (SymbolId t = 1; t < params.target_syms(); ++t) {
    double total = 0.0;
    for (SymbolId s = 1; s < params.source_syms(); ++s)
      total += params.sub_prob(t, s);
    if (total <= 0.0) continue;
    double h = 0.0;
    for (SymbolId s = 1; s < params.source_syms(); ++s) {
      const double p = params.sub_prob(t, s) / total;
      if (p > 0.0) h -= p * std::log(p);
    }
    out[t] = h;
  }
  return out;
}

std::string metrics_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "metric,value\n";
  out << "cer," << sig6(r.cer) << "\n";
  out << "wer," << sig6(r.wer) << "\n";
  out << "bleu," << sig6(r.bleu) << "\n";
  out << "char_match," << r.char_match << "\n";
  out << "char_sub," << r.char_sub << "\n";
  out << "char_ins," << r.char_ins << "\n";
  out << "char_del," << r.char_del << "\n";
  out << "word_match," << r.word_match << "\n";
  out << "word_sub," << r.word_sub << "\n";
  out << "word_ins," << r.word_ins << "\n";
  out << "word_del," << r.word_del << "\n";
  out << "insdel_share," << sig6(r.insdel_share) << "\n";
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream out;
  out << "ref,hyp,count\n";
  for (const auto& [key, c] : m.counts)
    out << render_codepoint(key.first) << ',' << render_codepoint(key.second)
        << ',' << c << "\n";
  return out.str();
}

std::string histogram_csv(const WordCerHistogram& h) {
  std::ostringstream out;
  out << "bin_low,bin_high,count\n";
  for (size_t b = 0; b + 1 < h.edges.size(); ++b)
    out << sig6(h.edges[b]) << ',' << sig6(h.edges[b + 1]) << ','
        << h.counts[b] << "\n";
  out << sig6(h.edges.back()) << ",inf," << h.overflow << "\n";
  return out.str();
}

std::string subst_types_csv(const SubstTypeStats& s) {
  // words can be punctuation tokens, so always quote them
  auto quoted = [](const std::string& w) {
    std::string out = "\"";
    for (char c : w) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream out;
  out << "ref_word,hyp_word,count\n";
  for (const auto& [type, c] : s.top_types)
    out << quoted(type.first) << ',' << quoted(type.second) << ',' << c
        << "\n";
  return out.str();
}

std::string summary_text(const ErrorProfile& p) {
  std::ostringstream out;
  out << "CER " << sig6(p.report.cer) << "\n";
  out << "WER " << sig6(p.report.wer) << "\n";
  out << "BLEU-4 " << sig6(p.report.bleu) << "\n";
  out << "char edits: " << p.report.char_sub << " sub, " << p.report.char_ins
      << " ins, " << p.report.char_del << " del (ins+del share "
      << sig6(p.report.insdel_share) << ")\n";
  out << "word edits: " << p.report.word_sub << " sub, " << p.report.word_ins
      << " ins, " << p.report.word_del << " del\n";
  out << "in-vocabulary rate " << sig6(p.in_vocab_rate) << "\n";
  out << "top-" << p.subst.k << " substitution types cover "
      << sig6(p.subst.coverage) << " of " << p.subst.total_subs
      << " word substitutions\n";
  return out.str();
}

}  // namespace uct
