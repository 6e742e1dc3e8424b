#include "uct/em.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uct {

namespace {

// Alignment grid node (i consumed target chars, j emitted source chars),
// valid when |j - i| <= d. Neg-log forward/backward values.
struct Grid {
  int m, n, d;
  std::vector<double> cells;
  Grid(int m_, int n_, int d_) : m(m_), n(n_), d(d_) {
    cells.assign(static_cast<size_t>(m + 1) * (n + 1), kInfWeight);
  }
  double& at(int i, int j) { return cells[static_cast<size_t>(i) * (n + 1) + j]; }
  double at(int i, int j) const {
    return cells[static_cast<size_t>(i) * (n + 1) + j];
  }
  bool valid(int i, int j) const { return std::abs(j - i) <= d; }
};

void forward_fill(Grid& a, const std::vector<SymbolId>& y,
                  const std::vector<SymbolId>& x, const EmissionParams& p) {
  a.at(0, 0) = 0.0;
  for (int i = 0; i <= a.m; ++i) {
    for (int j = 0; j <= a.n; ++j) {
      if (!a.valid(i, j) || (i == 0 && j == 0)) continue;
      double acc = kInfWeight;
      if (i > 0 && j > 0 && a.valid(i - 1, j - 1)) {
        const double w = p.sub_prob(y[i - 1], x[j - 1]);
        if (w > 0.0 && a.at(i - 1, j - 1) != kInfWeight)
          acc = semiring_plus(acc, a.at(i - 1, j - 1) - std::log(w),
                              Semiring::Log);
      }
      if (i > 0 && a.valid(i - 1, j)) {
        const double w = p.del_prob(y[i - 1]);
        if (w > 0.0 && a.at(i - 1, j) != kInfWeight)
          acc = semiring_plus(acc, a.at(i - 1, j) - std::log(w),
                              Semiring::Log);
      }
      if (j > 0 && a.valid(i, j - 1)) {
        const double w = p.ins_prob() * p.ins_dist(x[j - 1]);
        if (w > 0.0 && a.at(i, j - 1) != kInfWeight)
          acc = semiring_plus(acc, a.at(i, j - 1) - std::log(w),
                              Semiring::Log);
      }
      a.at(i, j) = acc;
    }
  }
}

void backward_fill(Grid& b, const std::vector<SymbolId>& y,
                   const std::vector<SymbolId>& x, const EmissionParams& p) {
  b.at(b.m, b.n) = 0.0;
  for (int i = b.m; i >= 0; --i) {
    for (int j = b.n; j >= 0; --j) {
      if (!b.valid(i, j) || (i == b.m && j == b.n)) continue;
      double acc = kInfWeight;
      if (i < b.m && j < b.n && b.valid(i + 1, j + 1)) {
        const double w = p.sub_prob(y[i], x[j]);
        if (w > 0.0 && b.at(i + 1, j + 1) != kInfWeight)
          acc = semiring_plus(acc, b.at(i + 1, j + 1) - std::log(w),
                              Semiring::Log);
      }
      if (i < b.m && b.valid(i + 1, j)) {
        const double w = p.del_prob(y[i]);
        if (w > 0.0 && b.at(i + 1, j) != kInfWeight)
          acc = semiring_plus(acc, b.at(i + 1, j) - std::log(w),
                              Semiring::Log);
      }
      if (j < b.n && b.valid(i, j + 1)) {
        const double w = p.ins_prob() * p.ins_dist(x[j]);
        if (w > 0.0 && b.at(i, j + 1) != kInfWeight)
          acc = semiring_plus(acc, b.at(i, j + 1) - std::log(w),
                              Semiring::Log);
      }
      b.at(i, j) = acc;
    }
  }
}

std::string ids_to_string(const std::vector<SymbolId>& ids) {
  std::string s;
  for (SymbolId id : ids) {
    if (!s.empty()) s += ' ';
    s += std::to_string(id);
  }
  return s;
}

}  // namespace

double channel_pair_weight(const std::vector<SymbolId>& y,
                           const std::vector<SymbolId>& x,
                           const EmissionParams& params, int delay_bound) {
  Grid a(static_cast<int>(y.size()), static_cast<int>(x.size()), delay_bound);
  forward_fill(a, y, x, params);
  return a.at(a.m, a.n);
}

OpCounts expected_counts(const std::vector<SymbolId>& y,
                         const std::vector<SymbolId>& x,
                         const EmissionParams& params, int delay_bound) {
  const int m = static_cast<int>(y.size());
  const int n = static_cast<int>(x.size());
  Grid a(m, n, delay_bound), b(m, n, delay_bound);
  forward_fill(a, y, x, params);
  backward_fill(b, y, x, params);
  const double total = a.at(m, n);
  if (total == kInfWeight)
    throw std::runtime_error("expected_counts: zero-probability pair y=[" +
                             ids_to_string(y) + "] x=[" + ids_to_string(x) +
                             "]");
  OpCounts counts;
  auto post = [&](double fw, double arc_w, double bw) {
    return std::exp(-(fw + arc_w + bw - total));
  };
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (!a.valid(i, j) || a.at(i, j) == kInfWeight) continue;
      if (i < m && j < n && a.valid(i + 1, j + 1)) {
        const double w = params.sub_prob(y[i], x[j]);
        if (w > 0.0 && b.at(i + 1, j + 1) != kInfWeight)
          counts[OpId{OpKind::Substitute, y[i], x[j]}] +=
              post(a.at(i, j), -std::log(w), b.at(i + 1, j + 1));
      }
      if (i < m && a.valid(i + 1, j)) {
        const double w = params.del_prob(y[i]);
        if (w > 0.0 && b.at(i + 1, j) != kInfWeight)
          counts[OpId{OpKind::Delete, y[i], 0}] +=
              post(a.at(i, j), -std::log(w), b.at(i + 1, j));
      }
      if (j < n && a.valid(i, j + 1)) {
        const double w = params.ins_prob() * params.ins_dist(x[j]);
        if (w > 0.0 && b.at(i, j + 1) != kInfWeight)
          counts[OpId{OpKind::Insert, 0, x[j]}] +=
              post(a.at(i, j), -std::log(w), b.at(i, j + 1));
      }
    }
  }
  return counts;
}

std::vector<SymbolId> decode_best_cascade(const std::vector<SymbolId>& x,
                                          const Wfst& cascade) {
  const Wfst lattice = compose(cascade, make_acceptor(x));
  auto paths = n_shortest_paths(lattice, 1);
  if (paths.empty())
    throw std::runtime_error(
        "decode_best: no path within delay bound for x=[" + ids_to_string(x) +
        "]");
  return paths.front().input;
}

std::vector<SymbolId> decode_best(const std::vector<SymbolId>& x,
                                  const Wfst& lm, const Wfst& channel) {
  return decode_best_cascade(x, compose(lm, channel));
}

std::vector<std::vector<SymbolId>> decode_corpus(
    const std::vector<Sequence>& xs, const Wfst& cascade, int workers) {
  std::vector<std::vector<SymbolId>> out(xs.size());
  if (workers <= 1) {
    for (size_t i = 0; i < xs.size(); ++i)
      out[i] = decode_best_cascade(xs[i].tokens, cascade);
    return out;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
  for (size_t i = 0; i < xs.size(); ++i)
    out[i] = decode_best_cascade(xs[i].tokens, cascade);
  return out;
}

std::vector<Sequence> select_shortest(const std::vector<Sequence>& corpus,
                                      size_t n) {
  std::vector<Sequence> sorted(corpus);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Sequence& a, const Sequence& b) {
                     return a.tokens.size() < b.tokens.size();
                   });
  if (sorted.size() > n) sorted.resize(n);
  return sorted;
}

EmState em_epoch(const EmState& state, const std::vector<Sequence>& train_x,
                 const Wfst& lm, const PriorSpec& prior,
                 const EmConfig& config, int workers,
                 std::vector<std::string>* warnings,
                 double* joint_neglogprob, const NGramLm* lm_model) {
  EmState st = state;
  const size_t total = train_x.size();
  if (joint_neglogprob) *joint_neglogprob = 0.0;

  for (size_t begin = 0; begin < total; begin += st.minibatch) {
    const size_t end = std::min(begin + st.minibatch, total);
    const Wfst channel = build_channel(st.params, config.delay_bound);
    const Wfst cascade = compose(lm, channel);

    // hard EM: fix the decoded targets for the whole minibatch first
    std::vector<std::vector<SymbolId>> decoded(end - begin);
    std::vector<char> ok(end - begin, 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
#endif
    for (size_t i = begin; i < end; ++i) {
      try {
        decoded[i - begin] = decode_best_cascade(train_x[i].tokens, cascade);
      } catch (const std::exception&) {
        ok[i - begin] = 0;
      }
    }

    OpCounts batch_counts;
    size_t used = 0;
    for (size_t i = begin; i < end; ++i) {
      if (!ok[i - begin]) {
        if (warnings)
          warnings->push_back("skipped undecodable sequence " +
                              std::to_string(i));
        continue;
      }
      try {
        for (const auto& [op, c] : expected_counts(
                 decoded[i - begin], train_x[i].tokens, st.params,
                 config.delay_bound))
          batch_counts[op] += c;
        ++used;
        if (joint_neglogprob && lm_model) {
          *joint_neglogprob +=
              lm_model->sequence_neglogprob(decoded[i - begin]) +
              channel_pair_weight(decoded[i - begin], train_x[i].tokens,
                                  st.params, config.delay_bound);
        }
      } catch (const std::exception& e) {
        if (warnings) warnings->push_back(e.what());
      }
    }
    if (used == 0) {
      ++st.step;
      continue;
    }

    const double eta = std::pow(static_cast<double>(st.step) + 2.0, -st.alpha);
    const double batch_fraction =
        static_cast<double>(used) / static_cast<double>(total);
    OpCounts blended;
    for (const auto& [op, c] : st.stats) blended[op] = (1.0 - eta) * c;
    for (const auto& [op, c] : batch_counts)
      blended[op] += eta * c / batch_fraction;
    st.stats = std::move(blended);
    st.params = map_update(st.stats, prior, st.params.target_syms(),
                           st.params.source_syms());
    ++st.step;
  }
  return st;
}

namespace {

// Per-row substitution argmax, the convergence signature.
std::vector<SymbolId> row_argmax(const EmissionParams& p) {
  std::vector<SymbolId> am(p.target_syms(), 0);
  for (SymbolId t = 1; t < p.target_syms(); ++t) {
    double best = -1.0;
    for (SymbolId s = 1; s < p.source_syms(); ++s) {
      if (p.sub_prob(t, s) > best) {
        best = p.sub_prob(t, s);
        am[t] = s;
      }
    }
  }
  return am;
}

}  // namespace

EmState train_channel(const std::vector<Sequence>& train_x, const Wfst& lm,
                      const NGramLm& lm_model, const PriorSpec& prior,
                      int target_syms, int source_syms,
                      const EmConfig& config, int workers,
                      std::function<void(int, const EmState&, double)>
                          epoch_callback) {
  EmState st;
  st.params = EmissionParams(target_syms, source_syms, prior);
  st.alpha = config.alpha;
  st.minibatch = config.minibatch;

  std::vector<SymbolId> prev_argmax;
  int stable_epochs = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double joint = 0.0;
    st = em_epoch(st, train_x, lm, prior, config, workers, nullptr, &joint,
                  &lm_model);
    if (epoch_callback) epoch_callback(epoch, st, joint);
    auto am = row_argmax(st.params);
    if (am == prev_argmax) {
      if (++stable_epochs >= config.patience) break;
    } else {
      stable_epochs = 0;
      prev_argmax = std::move(am);
    }
  }
  return st;
}

}  // namespace uct
