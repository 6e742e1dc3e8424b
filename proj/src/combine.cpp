#include "uct/combine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "uct/corpus.hpp"

namespace uct {

std::vector<Candidate> rerank(const std::vector<Candidate>& candidates,
                              const Rescorer& rescorer, RerankReport* report) {
  if (candidates.empty())
    throw std::invalid_argument("rerank: empty candidate list");
  std::vector<Candidate> out(candidates);
  int unreachable = 0;
  for (auto& c : out) {
    c.rescorer_score = rescorer(c.y);
    if (std::isinf(c.rescorer_score)) ++unreachable;
  }
  // stable: finite ascending by rescorer score, +inf keep generator order
  std::stable_sort(out.begin(), out.end(),
                   [](const Candidate& a, const Candidate& b) {
                     const bool ia = std::isinf(a.rescorer_score);
                     const bool ib = std::isinf(b.rescorer_score);
                     if (ia != ib) return ib;
                     if (ia) return false;
                     return a.rescorer_score < b.rescorer_score;
                   });
  if (report) report->unreachable = unreachable;
  return out;
}

std::vector<Candidate> generate_candidates_wfst(const std::vector<SymbolId>& x,
                                                const Wfst& cascade,
                                                size_t n) {
  const Wfst lattice = compose(cascade, make_acceptor(x));
  const auto paths = n_shortest_paths(lattice, n);
  if (paths.empty())
    throw std::runtime_error("generate_candidates_wfst: empty lattice");
  std::vector<Candidate> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    Candidate c;
    c.y = p.input;  // cascade input side carries the decoded string
    c.generator_score = p.weight;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Candidate> generate_candidates_seq2seq(
    const std::vector<SymbolId>& x, const Seq2SeqModel& model, size_t n) {
  if (n < 1)
    throw std::invalid_argument("generate_candidates_seq2seq: n < 1");
  struct Hyp {
    std::vector<SymbolId> y;
    double score = 0.0;
  };
  auto better = [](const Hyp& a, const Hyp& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.y < b.y;
  };
  std::vector<Hyp> live{{{}, 0.0}};
  std::vector<Hyp> done;
  for (size_t t = 0; t <= x.size() && !live.empty(); ++t) {
    std::vector<Hyp> next;
    for (const Hyp& hyp : live) {
      const auto dist = model.next_char_dist(x, hyp.y, kSourceToTarget);
      const int eos = model.eos();
      done.push_back({hyp.y, hyp.score - std::log(dist[eos])});
      if (t == x.size()) continue;  // length cap: EOS is the only option
      for (int s = 1; s < eos; ++s) {
        if (dist[s] <= 0.0) continue;
        Hyp ext = hyp;
        ext.y.push_back(s);
        ext.score -= std::log(dist[s]);
        next.push_back(std::move(ext));
      }
    }
    std::sort(next.begin(), next.end(), better);
    if (next.size() > n) next.resize(n);
    live = std::move(next);
  }
  std::sort(done.begin(), done.end(), better);
  if (done.size() > n) done.resize(n);
  std::vector<Candidate> out;
  for (const Hyp& hyp : done) {
    Candidate c;
    c.y = hyp.y;
    c.generator_score = hyp.score;
    out.push_back(std::move(c));
  }
  return out;
}

Rescorer make_wfst_rescorer(const std::vector<SymbolId>& x,
                            const Wfst& cascade) {
  const Wfst right = compose(cascade, make_acceptor(x));
  return [right](const std::vector<SymbolId>& y) {
    const Wfst lattice = compose(make_acceptor(y), right);
    return shortest_distance(lattice, Semiring::Log).total;
  };
}

Rescorer make_seq2seq_rescorer(const std::vector<SymbolId>& x,
                               const Seq2SeqModel& model, bool normalize) {
  return [x, &model, normalize](const std::vector<SymbolId>& y) {
    const double s = model.sequence_neglogprob(x, y, kSourceToTarget);
    return normalize ? s / static_cast<double>(y.size() + 1) : s;
  };
}

StepScorer make_seq2seq_step_scorer(const Seq2SeqModel& model) {
  return [&model](const std::vector<SymbolId>& x,
                  const std::vector<SymbolId>& y_prefix) {
    return model.next_char_dist(x, y_prefix, kSourceToTarget);
  };
}

namespace {

struct BeamHyp {
  int s = 0;       // cascade state
  double score = 0.0;
  std::vector<SymbolId> y;
  std::vector<std::pair<int, int>> trace;

  bool better_than(const BeamHyp& o) const {
    if (score != o.score) return score < o.score;
    return y < o.y;
  }
};

void prune(std::vector<BeamHyp>& group, size_t beam_size) {
  std::sort(group.begin(), group.end(),
            [](const BeamHyp& a, const BeamHyp& b) { return a.better_than(b); });
  if (group.size() > beam_size) group.resize(beam_size);
}

}  // namespace

PoeResult poe_decode(const std::vector<SymbolId>& x, const Wfst& cascade,
                     const StepScorer& scorer, size_t beam_size) {
  if (beam_size < 1) throw std::invalid_argument("poe_decode: beam size < 1");

  auto neural_term = [&](const std::vector<SymbolId>& y_prefix, int symbol) {
    const auto dist = scorer(x, y_prefix);
    return -std::log(dist.at(symbol));
  };

  std::vector<BeamHyp> group;
  group.push_back(BeamHyp{cascade.start(), 0.0, {}, {}});

  for (size_t k = 0; k <= x.size(); ++k) {
    // insertion closure: arcs that consume no input stay in this group.
    // Emitting arcs are rescored; the lattice bounds chain length.
    for (size_t i = 0; i < group.size(); ++i) {
      const BeamHyp hyp = group[i];  // copy: group grows underneath
      const auto& arcs = cascade.arcs(hyp.s);
      for (size_t ai = 0; ai < arcs.size(); ++ai) {
        const Arc& arc = arcs[ai];
        if (arc.out != 0) continue;
        BeamHyp next = hyp;
        next.s = arc.dst;
        next.score += arc.weight;
        if (arc.in != 0) {
          next.score += neural_term(hyp.y, arc.in);
          next.y.push_back(arc.in);
        }
        next.trace.emplace_back(hyp.s, static_cast<int>(ai));
        group.push_back(std::move(next));
      }
    }
    prune(group, beam_size);

    if (k == x.size()) break;

    // consume x[k]
    std::vector<BeamHyp> next_group;
    for (const BeamHyp& hyp : group) {
      const auto& arcs = cascade.arcs(hyp.s);
      for (size_t ai = 0; ai < arcs.size(); ++ai) {
        const Arc& arc = arcs[ai];
        if (arc.out != x[k]) continue;
        BeamHyp next = hyp;
        next.s = arc.dst;
        next.score += arc.weight;
        if (arc.in != 0) {
          next.score += neural_term(hyp.y, arc.in);
          next.y.push_back(arc.in);
        }
        next.trace.emplace_back(hyp.s, static_cast<int>(ai));
        next_group.push_back(std::move(next));
      }
    }
    group = std::move(next_group);
    if (group.empty()) break;
  }

  PoeResult result;
  for (const BeamHyp& hyp : group) {
    if (!cascade.is_final(hyp.s)) continue;
    PoeHypothesis fin;
    fin.y = hyp.y;
    const auto dist = scorer(x, hyp.y);  // EOS is the last entry
    fin.score = hyp.score + cascade.final_weight(hyp.s) - std::log(dist.back());
    fin.arc_trace = hyp.trace;
    result.finalized.push_back(std::move(fin));
  }
  if (result.finalized.empty())
    throw std::runtime_error(
        "poe_decode: no finalized hypothesis; increase the beam size or the "
        "channel delay bound");
  std::sort(result.finalized.begin(), result.finalized.end(),
            [](const PoeHypothesis& a, const PoeHypothesis& b) {
              if (a.score != b.score) return a.score < b.score;
              return a.y < b.y;
            });
  result.y = result.finalized.front().y;
  result.score = result.finalized.front().score;
  return result;
}

PoeResult poe_decode(const std::vector<SymbolId>& x, const Wfst& lm,
                     const Wfst& channel, const Seq2SeqModel& model,
                     size_t beam_size) {
  return poe_decode(x, compose(lm, channel), make_seq2seq_step_scorer(model),
                    beam_size);
}

std::string nbest_tsv(const std::vector<Candidate>& ranked,
                      const Alphabet& alphabet) {
  std::ostringstream out;
  for (size_t i = 0; i < ranked.size(); ++i) {
    const double score = std::isinf(ranked[i].rescorer_score)
                             ? ranked[i].generator_score
                             : ranked[i].rescorer_score;
    out << (i + 1) << '\t' << score << '\t'
        << detokenize(ranked[i].y, alphabet) << '\n';
  }
  return out.str();
}

}  // namespace uct
