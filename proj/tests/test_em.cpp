#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "uct/charlm.hpp"
#include "uct/em.hpp"
#include "uct/synthetic.hpp"

using namespace uct;

namespace {

PriorSpec flat_prior(double base) {
  PriorSpec p;
  p.base = base;
  return p;
}

// Near-deterministic channel mapping symbol t to cipher(t).
EmissionParams peaked_params(int syms, const std::vector<SymbolId>& cipher,
                             double peak = 0.95) {
  EmissionParams p(syms, syms, flat_prior(0.1));
  const int n = syms - 1;
  const double rest = n > 1 ? (1.0 - 1e-6 - peak - 1e-3) / (n - 1) : 0.0;
  for (SymbolId t = 1; t < syms; ++t) {
    std::vector<double> row(syms, 0.0);
    for (SymbolId s = 1; s < syms; ++s)
      row[s] = (s == cipher[t]) ? peak : rest;
    p.set_row(t, row, 1e-3);
  }
  std::vector<double> q(syms, 1.0 / n);
  q[0] = 0.0;
  p.set_insertion(1e-6, q);
  return p;
}

// Every candidate target string within the delay bound, scored by
// lm + channel; exhaustive argmax.
std::vector<SymbolId> brute_force_decode(const std::vector<SymbolId>& x,
                                         const NGramLm& lm,
                                         const EmissionParams& params,
                                         int d, int syms) {
  std::vector<SymbolId> best;
  double best_score = kInfWeight;
  std::function<void(std::vector<SymbolId>&)> rec = [&](std::vector<SymbolId>&
                                                            y) {
    const long long diff = static_cast<long long>(y.size()) -
                           static_cast<long long>(x.size());
    if (std::abs(diff) <= d) {
      const double ch = channel_pair_weight(y, x, params, d);
      if (ch != kInfWeight) {
        const double score = lm.sequence_neglogprob(y) + ch;
        if (score < best_score) {
          best_score = score;
          best = y;
        }
      }
    }
    if (y.size() >= x.size() + d) return;
    for (SymbolId s = 1; s < syms; ++s) {
      y.push_back(s);
      rec(y);
      y.pop_back();
    }
  };
  std::vector<SymbolId> y;
  rec(y);
  return best;
}

}  // namespace

TEST_CASE("expected_counts on forced alignments") {
  SUBCASE("unique alignment gives count 1") {
    const EmissionParams p = peaked_params(3, {0, 2, 1});
    const auto counts = expected_counts({1}, {2}, p, 0);
    CHECK(counts.at({OpKind::Substitute, 1, 2}) == doctest::Approx(1.0));
    CHECK(counts.size() == 1);
  }
  SUBCASE("two alignments split proportionally") {
    // y="a" (1), x="aa" (1,1): either sub+ins or ins+sub
    const EmissionParams p = peaked_params(3, {0, 1, 2});
    const auto got = expected_counts({1}, {1, 1}, p, 1);
    const auto want = oracle::alignment_expected_counts(
        oracle::enumerate_alignments({1}, {1, 1}, p, 1));
    REQUIRE(got.size() == want.size());
    for (const auto& [op, c] : want)
      CHECK(got.at(op) == doctest::Approx(c).epsilon(1e-12));
  }
  SUBCASE("zero-probability pair throws") {
    const EmissionParams p = peaked_params(3, {0, 1, 2});
    CHECK_THROWS(expected_counts({1}, {1, 1, 1, 1}, p, 1));  // delay 3 > 1
  }
}

TEST_CASE("expected_counts matches brute force on random pairs") {
  std::mt19937 rng(97);
  std::uniform_int_distribution<int> len(1, 5);
  std::uniform_int_distribution<int> sym(1, 3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    EmissionParams p(4, 4, flat_prior(0.3));
    // random but normalized rows
    const double ins_prob = u(rng) * 0.2;
    std::vector<double> q{0.0, 0.3, 0.3, 0.4};
    p.set_insertion(ins_prob, q);
    for (SymbolId t = 1; t < 4; ++t) {
      std::vector<double> row(4, 0.0);
      double total = 0.0;
      for (SymbolId s = 1; s < 4; ++s) total += row[s] = u(rng);
      const double del = u(rng) * 0.3;
      total += del;
      for (SymbolId s = 1; s < 4; ++s) row[s] *= (1.0 - ins_prob) / total;
      p.set_row(t, row, del * (1.0 - ins_prob) / total);
    }
    const int d = 1 + trial % 2;
    std::vector<SymbolId> y, x;
    for (int i = len(rng); i > 0; --i) y.push_back(sym(rng));
    for (int i = len(rng); i > 0; --i) x.push_back(sym(rng));
    const auto aligns = oracle::enumerate_alignments(y, x, p, d);
    if (aligns.empty()) {
      CHECK_THROWS(expected_counts(y, x, p, d));
      continue;
    }
    const auto want = oracle::alignment_expected_counts(aligns);
    const auto got = expected_counts(y, x, p, d);
    for (const auto& [op, c] : want)
      CHECK(got.at(op) == doctest::Approx(c).epsilon(1e-8));

    // structural identities hold in expectation
    double subs = 0, dels = 0, inss = 0;
    for (const auto& [op, c] : got) {
      if (op.kind == OpKind::Substitute) subs += c;
      if (op.kind == OpKind::Delete) dels += c;
      if (op.kind == OpKind::Insert) inss += c;
    }
    CHECK(subs + dels == doctest::Approx(double(y.size())).epsilon(1e-8));
    CHECK(subs + inss == doctest::Approx(double(x.size())).epsilon(1e-8));
  }
}

TEST_CASE("decode_best") {
  Alphabet a;
  std::vector<Sequence> corpus;
  for (const std::string line : {"abab", "baba", "abba", "baab"})
    corpus.push_back(tokenize(line, a));
  const int syms = static_cast<int>(a.size());
  const NGramLm lm = train_lm(corpus, 2, {}, syms);
  const Wfst lm_fsa = compile_lm(lm);

  SUBCASE("identity channel copies the input") {
    std::vector<SymbolId> ident(syms);
    for (int i = 0; i < syms; ++i) ident[i] = i;
    const EmissionParams p = peaked_params(syms, ident, 0.99);
    const Wfst channel = build_channel(p, 1);
    const auto y = decode_best(corpus[0].tokens, lm_fsa, channel);
    CHECK(y == corpus[0].tokens);
  }
  SUBCASE("peaked cipher channel matches exhaustive argmax") {
    // cipher swaps a and b
    std::vector<SymbolId> cipher(syms);
    const SymbolId ida = a.lookup('a'), idb = a.lookup('b');
    cipher[ida] = idb;
    cipher[idb] = ida;
    cipher[Alphabet::kUnk] = Alphabet::kUnk;
    const EmissionParams p = peaked_params(syms, cipher, 0.9);
    const Wfst channel = build_channel(p, 1);
    const Wfst cascade = compose(lm_fsa, channel);
    for (const auto& seq : corpus) {
      const auto got = decode_best_cascade(seq.tokens, cascade);
      const auto want = brute_force_decode(seq.tokens, lm, p, 1, syms);
      const double got_score = lm.sequence_neglogprob(got) +
                               channel_pair_weight(got, seq.tokens, p, 1);
      const double want_score = lm.sequence_neglogprob(want) +
                                channel_pair_weight(want, seq.tokens, p, 1);
      CHECK(got_score == doctest::Approx(want_score).epsilon(1e-6));
    }
  }
  SUBCASE("UNK passes through with its emission row") {
    std::vector<SymbolId> ident(syms);
    for (int i = 0; i < syms; ++i) ident[i] = i;
    const EmissionParams p = peaked_params(syms, ident, 0.99);
    const Wfst channel = build_channel(p, 1);
    std::vector<SymbolId> x = corpus[0].tokens;
    x[1] = Alphabet::kUnk;
    const auto got = decode_best(x, lm_fsa, channel);
    const auto want = brute_force_decode(x, lm, p, 1, syms);
    const double got_score =
        lm.sequence_neglogprob(got) + channel_pair_weight(got, x, p, 1);
    const double want_score =
        lm.sequence_neglogprob(want) + channel_pair_weight(want, x, p, 1);
    CHECK(got_score == doctest::Approx(want_score).epsilon(1e-6));
  }
  SUBCASE("empty lattice names the sequence") {
    const EmissionParams p = peaked_params(syms, {0, 1, 2, 3}, 0.99);
    const Wfst channel = build_channel(p, 0);
    // d=0 requires equal lengths; an impossible x is not constructible
    // here, so check the delay-violating case via the cascade with an
    // empty-output LM instead: compose with mismatched acceptor lengths
    Wfst empty_lm(1, 0);  // accepts only the empty string
    empty_lm.set_final(0, 0.0);
    CHECK_THROWS_AS(decode_best({1, 2}, empty_lm, channel),
                    std::runtime_error);
  }
}

TEST_CASE("decode_corpus parallel equals serial") {
  Alphabet a;
  std::vector<Sequence> corpus;
  for (const std::string line : {"abab", "baba", "abba", "baab", "aabb"})
    corpus.push_back(tokenize(line, a));
  const int syms = static_cast<int>(a.size());
  const NGramLm lm = train_lm(corpus, 2, {}, syms);
  std::vector<SymbolId> ident(syms);
  for (int i = 0; i < syms; ++i) ident[i] = i;
  const Wfst cascade = compose(compile_lm(lm),
                               build_channel(peaked_params(syms, ident), 1));
  const auto serial = decode_corpus(corpus, cascade, 1);
  const auto parallel = decode_corpus(corpus, cascade, 4);
  CHECK(serial == parallel);
}

TEST_CASE("em_epoch degenerate schedule equals one batch-EM step") {
  // alpha=0 with a full-data minibatch: eta = 1, so the blended stats are
  // exactly the batch counts
  Alphabet a;
  std::vector<Sequence> train;
  for (const std::string line : {"ab", "ba", "ab"})
    train.push_back(tokenize(line, a));
  const int syms = static_cast<int>(a.size());
  const NGramLm lm = train_lm(train, 2, {}, syms);
  const Wfst lm_fsa = compile_lm(lm);
  const PriorSpec prior = flat_prior(0.1);

  EmConfig cfg;
  cfg.delay_bound = 1;
  EmState st;
  st.params = EmissionParams(syms, syms, prior);
  st.alpha = 0.0;  // eta_k = 1 for every k
  st.minibatch = static_cast<int>(train.size());

  const EmState st2 = em_epoch(st, train, lm_fsa, prior, cfg);

  // manual batch step with the same initial params
  const Wfst cascade = compose(lm_fsa, build_channel(st.params, 1));
  OpCounts batch;
  for (const auto& seq : train) {
    const auto y = decode_best_cascade(seq.tokens, cascade);
    for (const auto& [op, c] : expected_counts(y, seq.tokens, st.params, 1))
      batch[op] += c;
  }
  const EmissionParams want = map_update(batch, prior, syms, syms);
  for (SymbolId t = 1; t < syms; ++t)
    for (SymbolId s = 1; s < syms; ++s)
      CHECK(st2.params.sub_prob(t, s) ==
            doctest::Approx(want.sub_prob(t, s)).epsilon(1e-12));
}

TEST_CASE("em_epoch is deterministic") {
  Alphabet a;
  std::vector<Sequence> train;
  for (const std::string line : {"abab", "bb", "abba", "baab"})
    train.push_back(tokenize(line, a));
  const int syms = static_cast<int>(a.size());
  const NGramLm lm = train_lm(train, 2, {}, syms);
  const Wfst lm_fsa = compile_lm(lm);
  const PriorSpec prior = flat_prior(0.1);
  EmConfig cfg;
  cfg.delay_bound = 1;
  EmState st;
  st.params = EmissionParams(syms, syms, prior);
  st.minibatch = 2;
  const EmState r1 = em_epoch(st, train, lm_fsa, prior, cfg, 1);
  const EmState r2 = em_epoch(st, train, lm_fsa, prior, cfg, 4);
  for (SymbolId t = 1; t < syms; ++t)
    for (SymbolId s = 1; s < syms; ++s)
      CHECK(r1.params.sub_prob(t, s) == r2.params.sub_prob(t, s));
}

TEST_CASE("stepwise EM recovers a small synthetic cipher" *
          doctest::timeout(120)) {
  CipherFixtureConfig fc;
  fc.seed = 21;
  fc.n_target_train = 300;
  fc.n_source_train = 300;
  fc.n_test = 20;
  fc.n_valid = 5;
  const CipherFixture fx = make_cipher_fixture(fc);

  Alphabet alphabet = induce_alphabet(fx.target_train, 1.0, {});
  for (const auto& line : fx.source_train)
    for (Codepoint cp : utf8_decode(line)) alphabet.add(to_lower(cp));
  const int syms = static_cast<int>(alphabet.size());

  std::vector<Sequence> target_train, source_train;
  for (const auto& l : fx.target_train)
    target_train.push_back(tokenize_fixed(l, alphabet));
  for (const auto& l : fx.source_train)
    source_train.push_back(tokenize_fixed(l, alphabet));

  const NGramLm lm = train_lm(target_train, 3, {}, syms);
  const Wfst lm_fsa = compile_lm(lm);
  // noisy similarity pairs from the fixture, plus the identical-codepoint
  // pair build_prior would auto-add for space
  PriorSpec prior = flat_prior(0.05);
  prior.sub_boosts[{alphabet.lookup(' '), alphabet.lookup(' ')}] = 2.0;
  for (const auto& [t, s] : fx.prior_pairs)
    prior.sub_boosts[{alphabet.lookup(static_cast<Codepoint>(t)),
                      alphabet.lookup(static_cast<Codepoint>(s))}] = 2.0;

  EmConfig cfg;
  cfg.delay_bound = 1;
  cfg.epochs = 8;
  cfg.minibatch = 10;
  const auto train_x = select_shortest(source_train, 200);
  const EmState st = train_channel(train_x, lm_fsa, lm, prior, syms, syms,
                                   cfg, 4);

  int correct = 0, total = 0;
  for (const auto& [t, s] : fx.cipher) {
    const SymbolId tid = alphabet.lookup(static_cast<Codepoint>(t));
    const SymbolId sid = alphabet.lookup(static_cast<Codepoint>(s));
    ++total;
    SymbolId argmax = 0;
    double best = -1.0;
    for (SymbolId cand = 1; cand < syms; ++cand)
      if (st.params.sub_prob(tid, cand) > best) {
        best = st.params.sub_prob(tid, cand);
        argmax = cand;
      }
    if (argmax == sid) ++correct;
  }
  // smoke-scale fixture: the noisy prior must get cleaned up, including
  // the rows it omits or pollutes
  CHECK(correct >= static_cast<int>(0.9 * total));
}
