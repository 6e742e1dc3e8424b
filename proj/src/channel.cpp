#include "uct/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "uct/corpus.hpp"

namespace uct {

namespace {
constexpr double kProbFloor = 1e-12;
}

EmissionParams::EmissionParams(int target_syms, int source_syms,
                               const PriorSpec& prior)
    : target_syms_(target_syms), source_syms_(source_syms) {
  const int n_src = source_syms - 1;  // ids 1..S-1
  // Prior-mean initialization. The shared insert-entry probability is the
  // average prior share of the insert outcome across rows.
  double a_mean = 0.0;
  for (SymbolId t = 1; t < target_syms; ++t) {
    double row = prior.base * 2.0;  // delete + insert-entry outcomes
    for (SymbolId s = 1; s < source_syms; ++s) row += prior.pseudocount(t, s);
    a_mean += row;
  }
  a_mean /= static_cast<double>(target_syms - 1);
  ins_prob_ = prior.base / a_mean;

  sub_.assign(target_syms, std::vector<double>(source_syms, 0.0));
  del_.assign(target_syms, 0.0);
  for (SymbolId t = 1; t < target_syms; ++t) {
    double total = prior.base;  // delete
    for (SymbolId s = 1; s < source_syms; ++s) total += prior.pseudocount(t, s);
    const double scale = (1.0 - ins_prob_) / total;
    for (SymbolId s = 1; s < source_syms; ++s)
      sub_[t][s] = prior.pseudocount(t, s) * scale;
    del_[t] = prior.base * scale;
  }
  ins_dist_.assign(source_syms, 0.0);
  for (SymbolId s = 1; s < source_syms; ++s)
    ins_dist_[s] = 1.0 / static_cast<double>(n_src);
}

double EmissionParams::sub_prob(SymbolId target, SymbolId source) const {
  return sub_.at(target).at(source);
}

double EmissionParams::del_prob(SymbolId target) const {
  return del_.at(target);
}

double EmissionParams::ins_dist(SymbolId source) const {
  return ins_dist_.at(source);
}

void EmissionParams::set_row(SymbolId target,
                             const std::vector<double>& sub_over_sources,
                             double del_prob) {
  sub_.at(target) = sub_over_sources;
  del_.at(target) = del_prob;
}

void EmissionParams::set_insertion(double ins_prob,
                                   const std::vector<double>& dist) {
  ins_prob_ = ins_prob;
  ins_dist_ = dist;
}

bool EmissionParams::rows_normalized(double tol) const {
  for (SymbolId t = 1; t < target_syms_; ++t) {
    double sum = ins_prob_ + del_[t];
    for (SymbolId s = 1; s < source_syms_; ++s) sum += sub_[t][s];
    if (std::abs(sum - 1.0) > tol) return false;
  }
  double q = 0.0;
  for (SymbolId s = 1; s < source_syms_; ++s) q += ins_dist_[s];
  return std::abs(q - 1.0) <= tol;
}

std::string EmissionParams::serialize(
    const std::map<std::string, std::string>& meta) const {
  std::ostringstream out;
  char buf[64];
  out << "# emission params " << target_syms_ << ' ' << source_syms_ << '\n';
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  auto emit = [&](SymbolId t, const char* op, SymbolId arg, double p) {
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    out << t << '\t' << op << '\t' << arg << '\t' << buf << '\n';
  };
  emit(0, "ins_entry", 0, ins_prob_);
  for (SymbolId s = 1; s < source_syms_; ++s) emit(0, "ins", s, ins_dist_[s]);
  for (SymbolId t = 1; t < target_syms_; ++t) {
    for (SymbolId s = 1; s < source_syms_; ++s) emit(t, "sub", s, sub_[t][s]);
    emit(t, "del", 0, del_[t]);
  }
  return out.str();
}

EmissionParams EmissionParams::deserialize(
    const std::string& text, std::map<std::string, std::string>* meta) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# emission params ", 0) != 0)
    throw std::runtime_error("bad emission params header");
  int tsyms, ssyms;
  if (std::sscanf(line.c_str(), "# emission params %d %d", &tsyms, &ssyms) != 2)
    throw std::runtime_error("bad emission params header");
  EmissionParams p;
  p.target_syms_ = tsyms;
  p.source_syms_ = ssyms;
  p.sub_.assign(tsyms, std::vector<double>(ssyms, 0.0));
  p.del_.assign(tsyms, 0.0);
  p.ins_dist_.assign(ssyms, 0.0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (meta != nullptr && eq != std::string::npos)
        (*meta)[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    std::istringstream ls(line);
    int t, arg;
    std::string op;
    double prob;
    if (!(ls >> t >> op >> arg >> prob))
      throw std::runtime_error("bad emission params line: " + line);
    if (op == "ins_entry") {
      p.ins_prob_ = prob;
    } else if (op == "ins") {
      p.ins_dist_.at(arg) = prob;
    } else if (op == "sub") {
      p.sub_.at(t).at(arg) = prob;
    } else if (op == "del") {
      p.del_.at(t) = prob;
    } else {
      throw std::runtime_error("bad emission op: " + op);
    }
  }
  return p;
}

void EmissionParams::save(const std::string& path,
                          const std::map<std::string, std::string>& meta) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize(meta);
}

EmissionParams EmissionParams::load(const std::string& path,
                                    std::map<std::string, std::string>* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str(), meta);
}

PriorSpec build_prior(const std::vector<std::string>& pair_files,
                      const Alphabet& target, const Alphabet& source,
                      double base, double boost,
                      std::vector<std::string>* warnings) {
  PriorSpec prior;
  prior.base = base;
  for (const auto& path : pair_files) {
    for (const auto& line : read_lines(path)) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> fields;
      std::istringstream ls(line);
      std::string f;
      while (std::getline(ls, f, '\t')) fields.push_back(f);
      if (fields.size() < 2) continue;
      const auto tcps = utf8_decode(fields[0]);
      const auto scps = utf8_decode(fields[1]);
      if (tcps.size() != 1 || scps.size() != 1) {
        if (warnings)
          warnings->push_back("skipping multi-character pair: " + line);
        continue;
      }
      const Codepoint tcp = to_lower(tcps[0]);
      const Codepoint scp = to_lower(scps[0]);
      if (!target.contains(tcp) || !source.contains(scp)) {
        // similarity resources contain noise; out-of-alphabet pairs are
        // skipped, not fatal
        if (warnings)
          warnings->push_back("pair outside alphabets: " + fields[0] + " " +
                              fields[1]);
        continue;
      }
      const double count =
          fields.size() >= 3 ? std::stod(fields[2]) : boost;
      if (count <= 0.0)
        throw std::invalid_argument("pseudocount must be > 0: " + line);
      prior.sub_boosts[{target.lookup(tcp), source.lookup(scp)}] = count;
    }
  }
  // identical codepoints present in both alphabets pair up automatically
  for (size_t tid = 2; tid < target.size(); ++tid) {
    const Codepoint cp = target.codepoint(static_cast<SymbolId>(tid));
    if (!source.contains(cp)) continue;
    const auto key = std::make_pair(static_cast<SymbolId>(tid),
                                    source.lookup(cp));
    if (!prior.sub_boosts.count(key)) prior.sub_boosts[key] = boost;
  }
  return prior;
}

Wfst build_channel(const EmissionParams& params, int delay_bound) {
  if (delay_bound < 0)
    throw std::invalid_argument("build_channel: delay bound must be >= 0");
  const int d = delay_bound;
  Wfst m(2 * d + 1, d);  // state index = delay + d
  m.input_syms = params.target_syms();
  m.output_syms = params.source_syms();
  for (int delta = -d; delta <= d; ++delta) {
    const int s = delta + d;
    for (SymbolId t = 1; t < params.target_syms(); ++t) {
      for (SymbolId o = 1; o < params.source_syms(); ++o) {
        const double p = params.sub_prob(t, o);
        if (p > 0.0) m.add_arc(s, t, o, -std::log(p), s);
      }
      if (delta - 1 >= -d) {
        const double p = params.del_prob(t);
        if (p > 0.0)
          m.add_arc(s, t, Alphabet::kEpsilon, -std::log(p), s - 1);
      }
    }
    if (delta + 1 <= d) {
      for (SymbolId o = 1; o < params.source_syms(); ++o) {
        const double p = params.ins_prob() * params.ins_dist(o);
        if (p > 0.0)
          m.add_arc(s, Alphabet::kEpsilon, o, -std::log(p), s + 1);
      }
    }
    m.set_final(s, 0.0);
  }
  return m;
}

EmissionParams map_update(const OpCounts& expected, const PriorSpec& prior,
                          int target_syms, int source_syms) {
  EmissionParams params(target_syms, source_syms, prior);

  double c_ins = 0.0, c_cons = 0.0;
  std::vector<double> ins_counts(source_syms, 0.0);
  std::vector<std::vector<double>> sub_counts(
      target_syms, std::vector<double>(source_syms, 0.0));
  std::vector<double> del_counts(target_syms, 0.0);
  for (const auto& [op, c] : expected) {
    if (c < 0.0) throw std::invalid_argument("map_update: negative count");
    switch (op.kind) {
      case OpKind::Insert:
        c_ins += c;
        ins_counts.at(op.source) += c;
        break;
      case OpKind::Substitute:
        c_cons += c;
        sub_counts.at(op.target).at(op.source) += c;
        break;
      case OpKind::Delete:
        c_cons += c;
        del_counts.at(op.target) += c;
        break;
    }
  }

  // Shared insert-entry probability: prior mean when untrained, MAP-style
  // two-way split otherwise.
  double ins_prob = params.ins_prob();
  if (c_ins + c_cons > 0.0) {
    const double num = std::max(c_ins + prior.base - 1.0, kProbFloor);
    const double den = std::max(c_cons + prior.base - 1.0, kProbFloor);
    ins_prob = num / (num + den);
  }

  std::vector<double> q(source_syms, 0.0);
  {
    double total = 0.0;
    for (SymbolId s = 1; s < source_syms; ++s) {
      q[s] = ins_counts[s] + prior.base;
      total += q[s];
    }
    for (SymbolId s = 1; s < source_syms; ++s) q[s] /= total;
  }
  params.set_insertion(ins_prob, q);

  for (SymbolId t = 1; t < target_syms; ++t) {
    std::vector<double> v(source_syms, 0.0);
    double vdel =
        std::max(del_counts[t] + prior.base - 1.0, 0.0);
    double total = vdel;
    for (SymbolId s = 1; s < source_syms; ++s) {
      v[s] = std::max(sub_counts[t][s] + prior.pseudocount(t, s) - 1.0, 0.0);
      total += v[s];
    }
    if (total <= 0.0) {
      // no posterior mass: prior mean
      vdel = prior.base;
      total = vdel;
      for (SymbolId s = 1; s < source_syms; ++s) {
        v[s] = prior.pseudocount(t, s);
        total += v[s];
      }
    }
    // floor, then renormalize within the non-insert share
    double floored_total = 0.0;
    for (SymbolId s = 1; s < source_syms; ++s) {
      v[s] = std::max(v[s], kProbFloor);
      floored_total += v[s];
    }
    vdel = std::max(vdel, kProbFloor);
    floored_total += vdel;
    const double scale = (1.0 - ins_prob) / floored_total;
    for (SymbolId s = 1; s < source_syms; ++s) v[s] *= scale;
    params.set_row(t, v, vdel * scale);
  }
  return params;
}

}  // namespace uct
