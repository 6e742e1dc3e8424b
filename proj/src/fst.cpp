#include "uct/fst.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace uct {

double semiring_plus(double x, double y, Semiring sr) {
  if (sr == Semiring::Tropical) return std::min(x, y);
  if (x == kInfWeight) return y;
  if (y == kInfWeight) return x;
  const double m = std::min(x, y);
  const double M = std::max(x, y);
  return m - std::log1p(std::exp(-(M - m)));
}

int Wfst::add_state() {
  arcs_.emplace_back();
  return static_cast<int>(arcs_.size()) - 1;
}

void Wfst::add_arc(int src, SymbolId in, SymbolId out, double weight,
                   int dst) {
  if (src < 0 || src >= num_states() || dst < 0 || dst >= num_states())
    throw std::out_of_range("add_arc: bad state id");
  if (weight < 0.0 && weight > -1e-12) weight = 0.0;  // numeric dust
  arcs_[src].push_back(Arc{dst, in, out, weight});
}

void Wfst::set_final(int s, double weight) {
  if (s < 0 || s >= num_states())
    throw std::out_of_range("set_final: bad state id");
  finals_[s] = weight;
}

double Wfst::final_weight(int s) const {
  auto it = finals_.find(s);
  return it == finals_.end() ? kInfWeight : it->second;
}

size_t Wfst::num_arcs() const {
  size_t n = 0;
  for (const auto& v : arcs_) n += v.size();
  return n;
}

std::string Wfst::serialize() const {
  std::ostringstream out;
  char buf[64];
  out << num_states() << ' ' << start_ << '\n';
  for (int s = 0; s < num_states(); ++s) {
    for (const Arc& a : arcs_[s]) {
      std::snprintf(buf, sizeof(buf), "%.17g", a.weight);
      out << s << ' ' << a.dst << ' ' << a.in << ' ' << a.out << ' ' << buf
          << '\n';
    }
  }
  for (const auto& [s, w] : finals_) {
    std::snprintf(buf, sizeof(buf), "%.17g", w);
    out << s << ' ' << buf << '\n';
  }
  return out.str();
}

Wfst Wfst::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty fst text");
  int nstates, start;
  if (std::sscanf(line.c_str(), "%d %d", &nstates, &start) != 2)
    throw std::runtime_error("bad fst header: " + line);
  Wfst m(nstates, start);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int src, dst, isym, osym;
    double w;
    const int n =
        std::sscanf(line.c_str(), "%d %d %d %d %lf", &src, &dst, &isym, &osym, &w);
    if (n == 5) {
      m.add_arc(src, isym, osym, w, dst);
    } else if (std::sscanf(line.c_str(), "%d %lf", &src, &w) == 2) {
      m.set_final(src, w);
    } else {
      throw std::runtime_error("bad fst line: " + line);
    }
  }
  return m;
}

void Wfst::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize();
}

Wfst Wfst::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

Wfst make_acceptor(const std::vector<SymbolId>& tokens) {
  Wfst m(static_cast<int>(tokens.size()) + 1, 0);
  for (size_t i = 0; i < tokens.size(); ++i)
    m.add_arc(static_cast<int>(i), tokens[i], tokens[i], 0.0,
              static_cast<int>(i) + 1);
  m.set_final(static_cast<int>(tokens.size()), 0.0);
  return m;
}

namespace {

// Composition state: (state of a, state of b, epsilon-filter state).
// Filter states: 0 = free, 1 = only a may move on epsilon,
// 2 = only b may move on epsilon. Simultaneous epsilon moves are taken
// from filter state 0 only, which picks one canonical interleaving of
// epsilon moves between real matches.
struct ComposeKey {
  int sa, sb, f;
  bool operator==(const ComposeKey& o) const {
    return sa == o.sa && sb == o.sb && f == o.f;
  }
};

struct ComposeKeyHash {
  size_t operator()(const ComposeKey& k) const {
    return (static_cast<size_t>(k.sa) * 1000003u + k.sb) * 4u + k.f;
  }
};

}  // namespace

Wfst compose(const Wfst& a, const Wfst& b) {
  if (a.output_syms != 0 && b.input_syms != 0 && a.output_syms != b.input_syms)
    throw std::invalid_argument("compose: alphabet mismatch (" +
                                std::to_string(a.output_syms) + " vs " +
                                std::to_string(b.input_syms) + ")");
  Wfst out;
  out.input_syms = a.input_syms;
  out.output_syms = b.output_syms;

  std::unordered_map<ComposeKey, int, ComposeKeyHash> ids;
  std::vector<ComposeKey> keys;
  std::queue<int> todo;
  auto state_of = [&](int sa, int sb, int f) {
    ComposeKey k{sa, sb, f};
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    const int id = out.add_state();
    ids.emplace(k, id);
    keys.push_back(k);
    todo.push(id);
    return id;
  };

  const int start = state_of(a.start(), b.start(), 0);
  out.set_start(start);

  while (!todo.empty()) {
    const int id = todo.front();
    todo.pop();
    const ComposeKey k = keys[id];

    if (a.is_final(k.sa) && b.is_final(k.sb))
      out.set_final(id, a.final_weight(k.sa) + b.final_weight(k.sb));

    for (const Arc& pa : a.arcs(k.sa)) {
      if (pa.out != Alphabet::kEpsilon) {
        for (const Arc& pb : b.arcs(k.sb)) {
          if (pb.in != pa.out) continue;
          out.add_arc(id, pa.in, pb.out, pa.weight + pb.weight,
                      state_of(pa.dst, pb.dst, 0));
        }
      } else {
        // a moves alone on its epsilon output
        if (k.f == 0 || k.f == 1)
          out.add_arc(id, pa.in, Alphabet::kEpsilon, pa.weight,
                      state_of(pa.dst, k.sb, 1));
        // simultaneous epsilon move
        if (k.f == 0) {
          for (const Arc& pb : b.arcs(k.sb)) {
            if (pb.in != Alphabet::kEpsilon) continue;
            out.add_arc(id, pa.in, pb.out, pa.weight + pb.weight,
                        state_of(pa.dst, pb.dst, 0));
          }
        }
      }
    }
    // b moves alone on its epsilon input
    if (k.f == 0 || k.f == 2) {
      for (const Arc& pb : b.arcs(k.sb)) {
        if (pb.in != Alphabet::kEpsilon) continue;
        out.add_arc(id, Alphabet::kEpsilon, pb.out, pb.weight,
                    state_of(k.sa, pb.dst, 2));
      }
    }
  }
  return out;
}

Wfst invert(const Wfst& m) {
  Wfst out(m.num_states(), m.start());
  out.input_syms = m.output_syms;
  out.output_syms = m.input_syms;
  for (int s = 0; s < m.num_states(); ++s)
    for (const Arc& a : m.arcs(s)) out.add_arc(s, a.out, a.in, a.weight, a.dst);
  for (const auto& [s, w] : m.finals()) out.set_final(s, w);
  return out;
}

namespace {

// Reverse topological order of reachable states, or empty if cyclic.
bool topo_order(const Wfst& m, std::vector<int>* order) {
  const int n = m.num_states();
  std::vector<int> color(n, 0);  // 0 white, 1 gray, 2 black
  std::vector<std::pair<int, size_t>> stack;
  stack.emplace_back(m.start(), 0);
  color[m.start()] = 1;
  while (!stack.empty()) {
    auto& [s, i] = stack.back();
    if (i < m.arcs(s).size()) {
      const int d = m.arcs(s)[i++].dst;
      if (color[d] == 1) return false;
      if (color[d] == 0) {
        color[d] = 1;
        stack.emplace_back(d, 0);
      }
    } else {
      color[s] = 2;
      order->push_back(s);
      stack.pop_back();
    }
  }
  std::reverse(order->begin(), order->end());
  return true;
}

}  // namespace

ShortestDistanceResult shortest_distance(const Wfst& m, Semiring sr) {
  ShortestDistanceResult res;
  res.distance.assign(m.num_states(), kInfWeight);
  if (m.num_states() == 0) return res;
  res.distance[m.start()] = 0.0;

  std::vector<int> order;
  if (topo_order(m, &order)) {
    for (int s : order) {
      const double d = res.distance[s];
      if (d == kInfWeight) continue;
      for (const Arc& a : m.arcs(s))
        res.distance[a.dst] =
            semiring_plus(res.distance[a.dst], d + a.weight, sr);
    }
  } else if (sr == Semiring::Tropical) {
    // Bellman-Ford; weights are non-negative so |V|-1 rounds suffice.
    for (int round = 0; round < m.num_states(); ++round) {
      bool changed = false;
      for (int s = 0; s < m.num_states(); ++s) {
        const double d = res.distance[s];
        if (d == kInfWeight) continue;
        for (const Arc& a : m.arcs(s)) {
          if (d + a.weight < res.distance[a.dst]) {
            res.distance[a.dst] = d + a.weight;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
  } else {
    throw std::runtime_error(
        "shortest_distance: cycle detected in log semiring");
  }

  for (const auto& [s, w] : m.finals())
    res.total = semiring_plus(res.total, res.distance[s] + w, sr);
  return res;
}

namespace {

struct Partial {
  int state;
  double g;  // accumulated weight
  double f;  // g + heuristic
  std::vector<SymbolId> input;
  std::vector<SymbolId> output;
  std::vector<std::pair<int, int>> arc_ids;
};

struct PartialWorse {
  bool operator()(const Partial& a, const Partial& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.output != b.output) return a.output > b.output;
    return a.arc_ids > b.arc_ids;
  }
};

}  // namespace

std::vector<Path> n_shortest_paths(const Wfst& m, size_t n) {
  std::vector<Path> result;
  if (n == 0 || m.num_states() == 0) return result;

  // Super-final trick: heuristic = tropical distance to acceptance in the
  // reversed machine, so a popped complete path has exact weight g.
  const int super_final = m.num_states();
  Wfst rev(m.num_states() + 1, super_final);
  for (int s = 0; s < m.num_states(); ++s)
    for (const Arc& a : m.arcs(s))
      rev.add_arc(a.dst, a.in, a.out, a.weight, s);
  for (const auto& [s, w] : m.finals()) rev.add_arc(super_final, 0, 0, w, s);
  const auto back = shortest_distance(rev, Semiring::Tropical);
  const auto h = [&](int s) { return back.distance[s]; };
  if (h(m.start()) == kInfWeight) return result;

  std::priority_queue<Partial, std::vector<Partial>, PartialWorse> queue;
  queue.push(Partial{m.start(), 0.0, h(m.start()), {}, {}, {}});

  // Pop budget guards against unbounded expansion on cyclic machines.
  size_t budget = 1000u * n * static_cast<size_t>(m.num_states() + 1) + 100000u;

  while (!queue.empty() && result.size() < n) {
    if (budget-- == 0)
      throw std::runtime_error("n_shortest_paths: expansion budget exceeded");
    Partial p = queue.top();
    queue.pop();
    if (p.state == -1) {  // parked completion, now in order
      result.push_back(Path{p.input, p.output, p.f, p.arc_ids});
      continue;
    }
    if (m.is_final(p.state)) {
      // Acceptance competes with continuations at weight g + final.
      const double total = p.g + m.final_weight(p.state);
      if (total <= p.f) {
        result.push_back(Path{p.input, p.output, total, p.arc_ids});
        if (result.size() >= n) break;
      } else {
        Partial q = p;
        q.state = -1;
        q.f = total;
        queue.push(std::move(q));
      }
    }
    const auto& arcs = m.arcs(p.state);
    for (int i = 0; i < static_cast<int>(arcs.size()); ++i) {
      const Arc& a = arcs[i];
      if (h(a.dst) == kInfWeight) continue;
      Partial q = p;
      q.state = a.dst;
      q.g = p.g + a.weight;
      q.f = q.g + h(a.dst);
      if (a.in != Alphabet::kEpsilon) q.input.push_back(a.in);
      if (a.out != Alphabet::kEpsilon) q.output.push_back(a.out);
      q.arc_ids.emplace_back(p.state, i);
      queue.push(std::move(q));
    }
  }
  return result;
}

Path shortest_path(const Wfst& m) {
  auto paths = n_shortest_paths(m, 1);
  if (paths.empty()) throw std::runtime_error("shortest_path: empty machine");
  return paths.front();
}

}  // namespace uct
