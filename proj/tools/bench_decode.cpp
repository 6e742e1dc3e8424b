// Benchmark: serial vs OpenMP sentence-level decoding on the synthetic
// cipher task. The parallel path must agree with the serial reference.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "uct/charlm.hpp"
#include "uct/em.hpp"
#include "uct/synthetic.hpp"

using namespace uct;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  const int sentences = argc > 1 ? std::atoi(argv[1]) : 300;
  const int max_workers = argc > 2 ? std::atoi(argv[2]) : 8;

  CipherFixtureConfig fixture_config;
  fixture_config.seed = 21;
  fixture_config.n_source_train = sentences;
  const CipherFixture fixture = make_cipher_fixture(fixture_config);

  Alphabet alphabet;
  for (char c : fixture.symbols) alphabet.add(static_cast<Codepoint>(c));
  std::vector<Sequence> target, source;
  for (const auto& line : fixture.target_train)
    target.push_back(tokenize_fixed(line, alphabet));
  for (const auto& line : fixture.source_train)
    source.push_back(tokenize_fixed(line, alphabet));

  const int syms = static_cast<int>(alphabet.size());
  const NGramLm lm = train_lm(target, 3, SmoothingConfig{}, syms);

  // an identity-leaning channel stands in for a trained one
  PriorSpec prior;
  prior.base = 0.05;
  for (const auto& [t, s] : fixture.cipher)
    prior.sub_boosts[{alphabet.lookup(static_cast<Codepoint>(t)),
                      alphabet.lookup(static_cast<Codepoint>(s))}] = 5.0;
  const EmissionParams params(syms, syms, prior);
  const Wfst cascade = compose(compile_lm(lm), build_channel(params, 1));

  std::printf("decoding %zu sentences, order-%d LM, %d symbols\n",
              source.size(), lm.order(), syms);

  const auto t0 = std::chrono::steady_clock::now();
  const auto serial = decode_corpus(source, cascade, 1);
  const double serial_s = seconds_since(t0);
  std::printf("%-10s %8.3f s  (reference)\n", "serial", serial_s);

  for (int workers = 2; workers <= max_workers; workers *= 2) {
    const auto t1 = std::chrono::steady_clock::now();
    const auto parallel = decode_corpus(source, cascade, workers);
    const double parallel_s = seconds_since(t1);
    const bool same = parallel == serial;
    std::printf("%d workers  %8.3f s  speedup %.2fx  %s\n", workers,
                parallel_s, serial_s / parallel_s,
                same ? "outputs match" : "OUTPUT MISMATCH");
    if (!same) return 1;
  }
  return 0;
}
