#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "uct/alphabet.hpp"
#include "uct/channel.hpp"

namespace uct {

// Levenshtein distance with unit costs.
long long edit_distance(const std::vector<SymbolId>& hyp,
                        const std::vector<SymbolId>& ref);

// dist(h, r) / len(r). Throws on an empty reference.
double cer(const std::vector<SymbolId>& hyp, const std::vector<SymbolId>& ref);
double cer(const std::string& hyp, const std::string& ref);

// Same ratio over word tokens.
double wer(const std::string& hyp, const std::string& ref);

// Splits on whitespace, detaches punctuation runs into their own tokens,
// keeps intra-word hyphens and apostrophes attached.
std::vector<std::string> word_tokenize(const std::string& s);

// Corpus-level BLEU-4 over word tokens: clipped n-gram precisions
// (n = 1..4), geometric mean, brevity penalty, no smoothing. In [0, 100].
double bleu4(const std::vector<std::string>& hyps,
             const std::vector<std::string>& refs);

// One minimum-cost alignment as (ref symbol or eps, hyp symbol or eps)
// pairs. Ties broken deterministically: substitution, then deletion
// (ref char lost), then insertion (hyp char added).
std::vector<std::pair<SymbolId, SymbolId>> align_chars(
    const std::vector<SymbolId>& hyp, const std::vector<SymbolId>& ref);

struct EvalReport {
  double cer = 0.0;
  double wer = 0.0;
  double bleu = 0.0;
  long long char_match = 0, char_sub = 0, char_ins = 0, char_del = 0;
  long long word_match = 0, word_sub = 0, word_ins = 0, word_del = 0;
  double insdel_share = 0.0;  // (ins + del) / all char edits
};

// Confusion counts keyed by (ref codepoint, hyp codepoint); 0 plays the
// epsilon role on either side.
struct ConfusionMatrix {
  std::map<std::pair<Codepoint, Codepoint>, long long> counts;
  long long total() const;
};

struct WordCerHistogram {
  std::vector<double> edges;      // bin i covers [edges[i], edges[i+1])
  std::vector<long long> counts;  // edges.size() - 1 bins
  long long overflow = 0;         // CER > cap, or hyp word aligned to eps
  long long total() const;
};

struct SubstTypeStats {
  // (ref word, hyp word) -> frequency, for word substitutions only.
  std::vector<std::pair<std::pair<std::string, std::string>, long long>>
      top_types;                 // most frequent first, rank-K ties kept
  long long total_subs = 0;
  long long covered = 0;         // substitutions covered by top_types
  double coverage = 0.0;
  int k = 0;
};

struct ErrorProfile {
  EvalReport report;
  ConfusionMatrix confusion;
  WordCerHistogram histogram;
  SubstTypeStats subst;
  double in_vocab_rate = 0.0;  // hyp word tokens found in training vocab
};

// Full comparative error analysis over (hypothesis, reference) pairs.
// Throws on an empty corpus or an empty reference line.
ErrorProfile error_profile(
    const std::vector<std::pair<std::string, std::string>>& hyp_ref,
    const std::set<std::string>& train_vocab, int top_k = 1000,
    double cer_cap = 1.0, int bins = 10);

// Entropy (nats) of each target char's substitution distribution,
// renormalized over substitutions only. Index = target symbol id.
std::vector<double> channel_row_entropies(const EmissionParams& params);

// CSV / plain-text renderers; numbers use 6 significant digits.
std::string metrics_csv(const EvalReport& report);
std::string confusion_csv(const ConfusionMatrix& confusion);
std::string histogram_csv(const WordCerHistogram& histogram);
std::string subst_types_csv(const SubstTypeStats& stats);
std::string summary_text(const ErrorProfile& profile);

}  // namespace uct
