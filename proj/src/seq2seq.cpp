#include "uct/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "uct/eval.hpp"

namespace uct {

using ad::Mat;

namespace {

// parameter indices
enum : int {
  kEmbed = 0,
  kEncWz, kEncUz, kEncBz, kEncWr, kEncUr, kEncBr, kEncWh, kEncUh, kEncBh,
  kDecWz, kDecUz, kDecBz, kDecWr, kDecUr, kDecBr, kDecWh, kDecUh, kDecBh,
  kWout, kBout,
  kNumParams
};

constexpr double kEpsMask = -1e30;  // epsilon is never a model output

Eigen::VectorXd sigmoid_vec(const Eigen::VectorXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

// plain (tape-free) GRU step, mirrored exactly by Forward::gru below
Eigen::VectorXd gru_step(const std::vector<Mat>& p, int base,
                         const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h) {
  const Eigen::VectorXd z = sigmoid_vec(p[base] * x + p[base + 1] * h +
                                        p[base + 2]);
  const Eigen::VectorXd r = sigmoid_vec(p[base + 3] * x + p[base + 4] * h +
                                        p[base + 5]);
  const Eigen::VectorXd hb =
      (p[base + 6] * x + p[base + 7] * r.cwiseProduct(h) + p[base + 8])
          .array()
          .tanh()
          .matrix();
  return (1.0 - z.array()).matrix().cwiseProduct(h) + z.cwiseProduct(hb);
}

}  // namespace

Seq2SeqModel::Seq2SeqModel(const Seq2SeqConfig& config) : config_(config) {
  if (config.vocab_size < 2)
    throw std::invalid_argument("seq2seq: vocab_size too small");
  const int e = config.embedding, h = config.hidden;
  const int tokens = config.vocab_size + 3;  // chars, EOS, two domain tags
  const int out = config.vocab_size + 1;     // chars + EOS

  params_.resize(kNumParams);
  params_[kEmbed] = Mat(e, tokens);
  for (int g = 0; g < 2; ++g) {
    const int base = g == 0 ? kEncWz : kDecWz;
    params_[base] = Mat(h, e);
    params_[base + 1] = Mat(h, h);
    params_[base + 2] = Mat::Zero(h, 1);
    params_[base + 3] = Mat(h, e);
    params_[base + 4] = Mat(h, h);
    params_[base + 5] = Mat::Zero(h, 1);
    params_[base + 6] = Mat(h, e);
    params_[base + 7] = Mat(h, h);
    params_[base + 8] = Mat::Zero(h, 1);
  }
  // zero output layer: a fresh model predicts the uniform distribution
  params_[kWout] = Mat::Zero(out, 2 * h);
  params_[kBout] = Mat::Zero(out, 1);

  std::mt19937 rng(config.seed);
  std::uniform_real_distribution<double> u(-0.08, 0.08);
  for (int i = 0; i < kWout; ++i) {
    if (params_[i].size() == 0) continue;
    if (i != kEmbed && params_[i].cols() == 1) continue;  // keep biases at 0
    for (long r = 0; r < params_[i].rows(); ++r)
      for (long c = 0; c < params_[i].cols(); ++c) params_[i](r, c) = u(rng);
  }
  zero_grads();
}

void Seq2SeqModel::zero_grads() {
  grads_.resize(params_.size());
  for (size_t i = 0; i < params_.size(); ++i)
    grads_[i] = Mat::Zero(params_[i].rows(), params_[i].cols());
}

namespace {

struct PlainState {
  Mat enc;                // hidden x (|x|+1), encoder states
  Eigen::VectorXd h;      // decoder hidden
};

}  // namespace

// --- plain forward path (scoring and decoding) ---------------------------

namespace {

int tag_token(int vocab, Domain d) {
  return vocab + 1 + (d == Domain::Target ? 1 : 0);
}

PlainState encode_plain(const std::vector<Mat>& p, int vocab,
                        const std::vector<SymbolId>& x, Direction dir) {
  const long h = p[kEncUz].rows();
  PlainState st;
  st.enc = Mat(h, static_cast<long>(x.size()) + 1);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(h);
  std::vector<int> tokens;
  tokens.push_back(tag_token(vocab, dir.to));
  for (SymbolId s : x) tokens.push_back(s);
  for (size_t t = 0; t < tokens.size(); ++t) {
    state = gru_step(p, kEncWz, p[kEmbed].col(tokens[t]), state);
    st.enc.col(static_cast<long>(t)) = state;
  }
  st.h = state;
  return st;
}

// one decoder step: consumes the previous output token, returns the
// post-softmax distribution over chars + EOS (epsilon masked)
Eigen::VectorXd decode_step_plain(const std::vector<Mat>& p, PlainState& st,
                                  int prev_token) {
  st.h = gru_step(p, kDecWz, p[kEmbed].col(prev_token), st.h);
  const Eigen::VectorXd scores = st.enc.transpose() * st.h;
  const double m = scores.maxCoeff();
  Eigen::VectorXd att = (scores.array() - m).exp().matrix();
  att /= att.sum();
  const Eigen::VectorXd ctx = st.enc * att;
  Eigen::VectorXd cat(st.h.size() + ctx.size());
  cat << st.h, ctx;
  Eigen::VectorXd logits = p[kWout] * cat + p[kBout];
  logits(0) += kEpsMask;
  const double lm = logits.maxCoeff();
  Eigen::VectorXd soft = (logits.array() - lm).exp().matrix();
  soft /= soft.sum();
  return soft;
}

}  // namespace

std::vector<double> Seq2SeqModel::next_char_dist(
    const std::vector<SymbolId>& x, const std::vector<SymbolId>& y_prefix,
    Direction dir) const {
  PlainState st = encode_plain(params_, vocab_size(), x, dir);
  int prev = tag_token(vocab_size(), dir.to);
  Eigen::VectorXd dist;
  for (size_t t = 0; t <= y_prefix.size(); ++t) {
    dist = decode_step_plain(params_, st, prev);
    if (t < y_prefix.size()) prev = y_prefix[t];
  }
  return std::vector<double>(dist.data(), dist.data() + dist.size());
}

std::vector<SymbolId> Seq2SeqModel::greedy_decode(
    const std::vector<SymbolId>& x, Direction dir) const {
  std::vector<SymbolId> y;
  if (x.empty()) return y;
  PlainState st = encode_plain(params_, vocab_size(), x, dir);
  int prev = tag_token(vocab_size(), dir.to);
  while (y.size() < x.size()) {
    const Eigen::VectorXd dist = decode_step_plain(params_, st, prev);
    long best = 0;
    dist.maxCoeff(&best);
    if (best == eos()) break;
    y.push_back(static_cast<SymbolId>(best));
    prev = static_cast<int>(best);
  }
  return y;
}

double Seq2SeqModel::sequence_neglogprob(const std::vector<SymbolId>& x,
                                         const std::vector<SymbolId>& y,
                                         Direction dir) const {
  PlainState st = encode_plain(params_, vocab_size(), x, dir);
  int prev = tag_token(vocab_size(), dir.to);
  double total = 0.0;
  for (size_t t = 0; t <= y.size(); ++t) {
    const Eigen::VectorXd dist = decode_step_plain(params_, st, prev);
    const int target = t < y.size() ? y[t] : eos();
    total += -std::log(dist(target));
    if (t < y.size()) prev = y[t];
  }
  return total;
}

// --- tape forward path (training) -----------------------------------------

struct Seq2SeqModel::Forward {
  ad::Tape tape;
  std::vector<ad::Var> p;

  explicit Forward(const std::vector<Mat>& params) {
    p.reserve(params.size());
    for (const Mat& m : params) p.push_back(tape.leaf(m));
  }

  ad::Var embed(int token) {
    // a matmul with a one-hot column routes gradients into one column
    const long tokens = tape.value(p[kEmbed]).cols();
    Mat onehot = Mat::Zero(tokens, 1);
    onehot(token, 0) = 1.0;
    return tape.matmul(p[kEmbed], tape.constant(onehot));
  }

  ad::Var gru(int base, ad::Var x, ad::Var h) {
    ad::Var z = tape.sigmoid(tape.add(
        tape.add(tape.matmul(p[base], x), tape.matmul(p[base + 1], h)),
        p[base + 2]));
    ad::Var r = tape.sigmoid(tape.add(
        tape.add(tape.matmul(p[base + 3], x), tape.matmul(p[base + 4], h)),
        p[base + 5]));
    ad::Var hb = tape.tanh(tape.add(
        tape.add(tape.matmul(p[base + 6], x),
                 tape.matmul(p[base + 7], tape.hadamard(r, h))),
        p[base + 8]));
    return tape.add(tape.hadamard(tape.one_minus(z), h), tape.hadamard(z, hb));
  }

  // full neg-log-likelihood of (x -> y . EOS)
  ad::Var loss(const Seq2SeqConfig& cfg, const std::vector<SymbolId>& x,
               const std::vector<SymbolId>& y, Direction dir) {
    const int hidden = cfg.hidden;
    ad::Var h = tape.constant(Mat::Zero(hidden, 1));
    std::vector<int> tokens;
    tokens.push_back(tag_token(cfg.vocab_size, dir.to));
    for (SymbolId s : x) tokens.push_back(s);
    ad::Var enc{-1};
    for (size_t t = 0; t < tokens.size(); ++t) {
      h = gru(kEncWz, embed(tokens[t]), h);
      enc = t == 0 ? h : tape.concat_cols(enc, h);
    }
    ad::Var mask = tape.constant([&] {
      Mat m = Mat::Zero(cfg.vocab_size + 1, 1);
      m(0, 0) = kEpsMask;
      return m;
    }());
    ad::Var total = tape.constant(Mat::Zero(1, 1));
    int prev = tag_token(cfg.vocab_size, dir.to);
    for (size_t t = 0; t <= y.size(); ++t) {
      h = gru(kDecWz, embed(prev), h);
      ad::Var att = tape.softmax(tape.matmul(tape.transpose(enc), h));
      ad::Var ctx = tape.matmul(enc, att);
      ad::Var logits = tape.add(
          tape.add(tape.matmul(p[kWout], tape.concat_rows(h, ctx)), p[kBout]),
          mask);
      const int target = t < y.size() ? y[t] : cfg.vocab_size;
      total = tape.add(total, tape.cross_entropy(logits, target));
      if (t < y.size()) prev = y[t];
    }
    return total;
  }
};

double Seq2SeqModel::forward_loss(const std::vector<SymbolId>& x,
                                  const std::vector<SymbolId>& y,
                                  Direction dir) const {
  Forward f(params_);
  return f.tape.value(f.loss(config_, x, y, dir))(0, 0);
}

double Seq2SeqModel::accumulate_gradients(const std::vector<SymbolId>& x,
                                          const std::vector<SymbolId>& y,
                                          Direction dir, double weight) {
  Forward f(params_);
  ad::Var loss = f.loss(config_, x, y, dir);
  const double value = f.tape.value(loss)(0, 0);
  f.tape.backward(loss);
  for (size_t i = 0; i < params_.size(); ++i)
    grads_[i] += weight * f.tape.grad(f.p[i]);
  return value;
}

void Seq2SeqModel::sgd_step(double learning_rate, double clip) {
  double sq = 0.0;
  for (const Mat& g : grads_) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  const double factor = (clip > 0.0 && norm > clip) ? clip / norm : 1.0;
  for (size_t i = 0; i < params_.size(); ++i)
    params_[i] -= learning_rate * factor * grads_[i];
  zero_grads();
}

// --- noise and training ----------------------------------------------------

std::vector<SymbolId> apply_noise(const std::vector<SymbolId>& tokens,
                                  const NoiseConfig& noise,
                                  std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SymbolId> kept;
  for (SymbolId t : tokens)
    if (u(rng) >= noise.drop) kept.push_back(t);
  if (kept.empty() && !tokens.empty())
    kept.push_back(tokens[rng() % tokens.size()]);
  // bounded local shuffle: sort by index + U(0, window)
  std::vector<std::pair<double, SymbolId>> keyed;
  std::uniform_real_distribution<double> jitter(
      0.0, static_cast<double>(std::max(noise.window, 1)));
  for (size_t i = 0; i < kept.size(); ++i)
    keyed.emplace_back(static_cast<double>(i) + jitter(rng), kept[i]);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<SymbolId> out;
  for (const auto& [key, t] : keyed) out.push_back(t);
  return out;
}

Seq2SeqModel train_unmt(const std::vector<Sequence>& source_corpus,
                        const std::vector<Sequence>& target_corpus,
                        const Seq2SeqConfig& config, const NoiseConfig& noise,
                        const TrainSchedule& schedule,
                        const std::vector<std::pair<Sequence, Sequence>>& valid,
                        TrainReport* report) {
  if (source_corpus.empty() || target_corpus.empty())
    throw std::invalid_argument("train_unmt: empty corpus");

  Seq2SeqModel model(config);
  std::mt19937 rng(config.seed + 0x5bd1);

  auto check = [&](double loss, int epoch, size_t i, const char* what) {
    if (!std::isfinite(loss))
      throw std::runtime_error(
          "train_unmt: non-finite " + std::string(what) + " loss at epoch " +
          std::to_string(epoch) + ", example " + std::to_string(i));
  };

  auto validation_cer = [&]() {
    long long dist = 0, len = 0;
    for (const auto& [src, tgt] : valid) {
      const auto hyp = model.greedy_decode(src.tokens, kSourceToTarget);
      dist += edit_distance(hyp, tgt.tokens);
      len += static_cast<long long>(tgt.tokens.size());
    }
    return len == 0 ? 0.0 : static_cast<double>(dist) / static_cast<double>(len);
  };

  std::vector<Mat> best_params = model.params();
  double best_cer = valid.empty() ? -1.0 : 1e18;
  int bad_epochs = 0;
  int epochs_run = 0;
  std::vector<double> history;

  const size_t steps = std::max(source_corpus.size(), target_corpus.size());
  std::vector<size_t> order(steps);
  for (size_t i = 0; i < steps; ++i) order[i] = i;

  double lr = schedule.learning_rate;
  for (int epoch = 0; epoch < schedule.max_epochs; ++epoch) {
    if (epoch > 0) lr *= schedule.lr_decay;
    const double ae_weight =
        epoch >= schedule.anneal_epochs
            ? schedule.ae_floor
            : 1.0 - (1.0 - schedule.ae_floor) *
                        (static_cast<double>(epoch) /
                         static_cast<double>(schedule.anneal_epochs));
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i : order) {
      const auto& s = source_corpus[i % source_corpus.size()].tokens;
      const auto& t = target_corpus[i % target_corpus.size()].tokens;

      // denoising autoencoding in both domains
      check(model.accumulate_gradients(apply_noise(s, noise, rng), s,
                                       {Domain::Source, Domain::Source},
                                       ae_weight),
            epoch, i, "source autoencoding");
      model.sgd_step(lr, schedule.clip);
      check(model.accumulate_gradients(apply_noise(t, noise, rng), t,
                                       {Domain::Target, Domain::Target},
                                       ae_weight),
            epoch, i, "target autoencoding");
      model.sgd_step(lr, schedule.clip);

      // on-the-fly back-translation in both directions
      const auto t_hat = model.greedy_decode(s, kSourceToTarget);
      if (!t_hat.empty()) {
        check(model.accumulate_gradients(t_hat, s, kTargetToSource), epoch, i,
              "back-translation (target->source)");
        model.sgd_step(lr, schedule.clip);
      }
      const auto s_hat = model.greedy_decode(t, kTargetToSource);
      if (!s_hat.empty()) {
        check(model.accumulate_gradients(s_hat, t, kSourceToTarget), epoch, i,
              "back-translation (source->target)");
        model.sgd_step(lr, schedule.clip);
      }
    }
    ++epochs_run;
    if (valid.empty()) continue;
    const double cer = validation_cer();
    history.push_back(cer);
    if (cer < best_cer - 1e-9) {
      best_cer = cer;
      best_params = model.params();
      bad_epochs = 0;
    } else if (++bad_epochs >= schedule.patience) {
      break;
    }
  }

  model.params() = best_params;
  if (report) {
    report->epochs_run = epochs_run;
    report->best_val_cer = best_cer < 0 ? 0.0 : best_cer;
    report->val_cer_history = history;
  }
  return model;
}

// --- checkpointing ---------------------------------------------------------

std::string Seq2SeqModel::manifest() const {
  std::ostringstream out;
  out << "uct-seq2seq v1\n";
  out << "vocab_size " << config_.vocab_size << "\n";
  out << "embedding " << config_.embedding << "\n";
  out << "hidden " << config_.hidden << "\n";
  out << "seed " << config_.seed << "\n";
  out << "tensors " << params_.size() << "\n";
  return out.str();
}

void Seq2SeqModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << manifest() << "data\n";
  for (const Mat& m : params_) {
    const uint64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
  }
}

Seq2SeqModel Seq2SeqModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "uct-seq2seq v1")
    throw std::runtime_error("bad checkpoint header in " + path);
  Seq2SeqConfig cfg;
  size_t tensors = 0;
  while (std::getline(in, line) && line != "data") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "vocab_size") ls >> cfg.vocab_size;
    else if (key == "embedding") ls >> cfg.embedding;
    else if (key == "hidden") ls >> cfg.hidden;
    else if (key == "seed") ls >> cfg.seed;
    else if (key == "tensors") ls >> tensors;
    else throw std::runtime_error("unknown manifest key: " + key);
  }
  Seq2SeqModel model(cfg);
  if (tensors != model.params_.size())
    throw std::runtime_error("checkpoint tensor count mismatch");
  for (Mat& m : model.params_) {
    uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in || rows != static_cast<uint64_t>(m.rows()) ||
        cols != static_cast<uint64_t>(m.cols()))
      throw std::runtime_error("checkpoint tensor shape mismatch");
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw std::runtime_error("truncated checkpoint " + path);
  }
  return model;
}

}  // namespace uct
