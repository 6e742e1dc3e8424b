#include "uct/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "uct/charlm.hpp"
#include "uct/combine.hpp"
#include "uct/corpus.hpp"
#include "uct/em.hpp"
#include "uct/eval.hpp"
#include "uct/seq2seq.hpp"

namespace uct {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0";

struct Paths {
  std::string dir;
  std::string at(const std::string& name) const { return dir + "/" + name; }
  std::string alphabet() const { return at("alphabet.txt"); }
  std::string lm() const { return at("lm.arpa"); }
  std::string channel() const { return at("channel.tsv"); }
  std::string seq2seq() const { return at("seq2seq.bin"); }
  std::string decoded() const { return at("decoded.txt"); }
  std::string manifest() const { return at("manifest.txt"); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

std::string require_input(const std::string& path, const std::string& what) {
  if (path.empty())
    throw ConfigError("config: [data]." + what + " is required here");
  if (!fs::exists(path))
    throw DataError(what + " file not found: " + path);
  return path;
}

void require_artifact(const std::string& path, const std::string& stage) {
  if (!fs::exists(path))
    throw DataError("missing artifact " + path + "; run `uct " + stage +
                    "` first");
}

std::vector<Sequence> tokenize_lines(const std::vector<std::string>& lines,
                                     const Alphabet& alphabet) {
  std::vector<Sequence> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(tokenize_fixed(line, alphabet));
  return out;
}

void write_manifest(const ExperimentConfig& config, const Paths& paths) {
  std::ostringstream out;
  out << "uct experiment manifest\n";
  out << "version " << kVersion << "\n";
  out << "config_hash " << config_hash(config) << "\n";
  out << "seed " << config.seed << "\n";
  write_file(paths.manifest(), out.str());
}

// --- stages ----------------------------------------------------------------

void stage_prepare(const ExperimentConfig& config, const Paths& paths) {
  // one shared symbol table across domains keeps the channel, the LM and
  // the seq2seq model in a single id space
  std::vector<std::string> lines =
      read_lines(require_input(config.train_target, "train_target"));
  const auto source =
      read_lines(require_input(config.train_source, "train_source"));
  lines.insert(lines.end(), source.begin(), source.end());
  std::set<Codepoint> addbacks;
  if (!config.addbacks.empty())
    addbacks = read_addbacks(require_input(config.addbacks, "addbacks"));
  const Alphabet alphabet = induce_alphabet(lines, config.coverage, addbacks);
  alphabet.save(paths.alphabet());
}

void stage_train_lm(const ExperimentConfig& config, const Paths& paths) {
  require_artifact(paths.alphabet(), "prepare");
  const Alphabet alphabet = Alphabet::load(paths.alphabet());
  const auto lines =
      read_lines(require_input(config.train_target, "train_target"));
  const auto corpus = tokenize_lines(lines, alphabet);
  const NGramLm lm = train_lm(corpus, config.lm_order, SmoothingConfig{},
                              static_cast<int>(alphabet.size()));
  lm.save(paths.lm());
}

PriorSpec load_prior(const ExperimentConfig& config, const Alphabet& alphabet) {
  std::vector<std::string> files;
  if (!config.priors.empty())
    files.push_back(require_input(config.priors, "priors"));
  return build_prior(files, alphabet, alphabet, config.prior_base,
                     config.prior_boost);
}

void stage_train_wfst(const ExperimentConfig& config, const Paths& paths) {
  require_artifact(paths.alphabet(), "prepare");
  require_artifact(paths.lm(), "train-lm");
  const Alphabet alphabet = Alphabet::load(paths.alphabet());
  const NGramLm lm = NGramLm::load(paths.lm());
  const Wfst lm_fsa = compile_lm(lm);
  const auto lines =
      read_lines(require_input(config.train_source, "train_source"));
  const auto train_x =
      select_shortest(tokenize_lines(lines, alphabet),
                      static_cast<size_t>(config.em_train_size));
  const PriorSpec prior = load_prior(config, alphabet);
  EmConfig em;
  em.alpha = config.em_alpha;
  em.minibatch = config.em_minibatch;
  em.epochs = config.em_epochs;
  em.train_size = config.em_train_size;
  em.delay_bound = config.delay;
  em.patience = config.em_patience;
  const EmState state =
      train_channel(train_x, lm_fsa, lm, prior,
                    static_cast<int>(alphabet.size()),
                    static_cast<int>(alphabet.size()), em, config.workers);
  state.params.save(paths.channel(), {{"config_hash", config_hash(config)},
                                      {"delay", std::to_string(config.delay)}});
}

void stage_train_seq2seq(const ExperimentConfig& config, const Paths& paths) {
  require_artifact(paths.alphabet(), "prepare");
  const Alphabet alphabet = Alphabet::load(paths.alphabet());
  const auto src_lines =
      read_lines(require_input(config.train_source, "train_source"));
  const auto tgt_lines =
      read_lines(require_input(config.train_target, "train_target"));
  const auto source =
      select_shortest(tokenize_lines(src_lines, alphabet),
                      static_cast<size_t>(config.neural_train_size));
  const auto target =
      select_shortest(tokenize_lines(tgt_lines, alphabet),
                      static_cast<size_t>(config.neural_train_size));

  std::vector<std::pair<Sequence, Sequence>> valid;
  if (!config.valid_source.empty() && !config.valid_target.empty()) {
    const auto vs = read_lines(require_input(config.valid_source,
                                             "valid_source"));
    const auto vt = read_lines(require_input(config.valid_target,
                                             "valid_target"));
    if (vs.size() != vt.size())
      throw DataError("validation corpora differ in length");
    for (size_t i = 0; i < vs.size(); ++i)
      valid.emplace_back(tokenize_fixed(vs[i], alphabet),
                         tokenize_fixed(vt[i], alphabet));
  }

  Seq2SeqConfig model_config;
  model_config.vocab_size = static_cast<int>(alphabet.size());
  model_config.embedding = config.embedding;
  model_config.hidden = config.hidden;
  model_config.seed = config.seed;
  NoiseConfig noise;
  noise.drop = config.noise_drop;
  noise.window = config.noise_window;
  TrainSchedule schedule;
  schedule.max_epochs = config.neural_max_epochs;
  schedule.anneal_epochs = config.neural_anneal_epochs;
  schedule.ae_floor = config.neural_ae_floor;
  schedule.patience = config.neural_patience;
  schedule.learning_rate = config.learning_rate;
  schedule.lr_decay = config.lr_decay;
  schedule.clip = config.grad_clip;
  try {
    const Seq2SeqModel model =
        train_unmt(source, target, model_config, noise, schedule, valid);
    model.save(paths.seq2seq());
  } catch (const std::runtime_error& e) {
    if (std::string(e.what()).find("non-finite") != std::string::npos)
      throw NumericalError(e.what());
    throw;
  }
}

bool decoder_uses_wfst(const std::string& decoder) {
  return decoder != "seq2seq";
}

bool decoder_uses_seq2seq(const std::string& decoder) {
  return decoder != "wfst";
}

void stage_decode(const ExperimentConfig& config, const Paths& paths) {
  require_artifact(paths.alphabet(), "prepare");
  const Alphabet alphabet = Alphabet::load(paths.alphabet());
  const auto lines =
      read_lines(require_input(config.test_source, "test_source"));
  const auto xs = tokenize_lines(lines, alphabet);

  Wfst cascade;
  EmissionParams params;
  if (decoder_uses_wfst(config.decoder)) {
    require_artifact(paths.lm(), "train-lm");
    require_artifact(paths.channel(), "train-wfst");
    const NGramLm lm = NGramLm::load(paths.lm());
    params = EmissionParams::load(paths.channel(), nullptr);
    cascade = compose(compile_lm(lm), build_channel(params, config.delay));
  }
  Seq2SeqModel model;
  if (decoder_uses_seq2seq(config.decoder)) {
    require_artifact(paths.seq2seq(), "train-seq2seq");
    model = Seq2SeqModel::load(paths.seq2seq());
  }

  const bool dump_nbest = config.decoder == "rerank-wfst" ||
                          config.decoder == "rerank-seq2seq";
  if (dump_nbest) fs::create_directories(paths.at("nbest"));

  std::vector<std::string> outputs(xs.size());
  auto decode_one = [&](size_t i) {
    const auto& x = xs[i].tokens;
    std::vector<SymbolId> y;
    std::vector<Candidate> ranked;
    if (config.decoder == "wfst") {
      y = decode_best_cascade(x, cascade);
    } else if (config.decoder == "seq2seq") {
      y = model.greedy_decode(x, kSourceToTarget);
    } else if (config.decoder == "poe") {
      y = poe_decode(x, cascade, make_seq2seq_step_scorer(model),
                     static_cast<size_t>(config.beam))
              .y;
    } else if (config.decoder == "rerank-wfst") {
      const auto cands = generate_candidates_wfst(
          x, cascade, static_cast<size_t>(config.nbest));
      ranked = rerank(cands, make_seq2seq_rescorer(x, model,
                                                   config.normalize_rescore));
      y = ranked.front().y;
    } else {  // rerank-seq2seq
      const auto cands = generate_candidates_seq2seq(
          x, model, static_cast<size_t>(config.nbest));
      ranked = rerank(cands, make_wfst_rescorer(x, cascade));
      y = ranked.front().y;
    }
    outputs[i] = detokenize(y, alphabet);
    if (dump_nbest) {
      std::ostringstream name;
      name << "nbest/" << i << ".tsv";
      write_file(paths.at(name.str()), nbest_tsv(ranked, alphabet));
    }
  };

  std::vector<std::string> failures(xs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.workers) \
    if (config.workers > 1)
#endif
  for (size_t i = 0; i < xs.size(); ++i) {
    try {
      decode_one(i);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (size_t i = 0; i < xs.size(); ++i)
    if (!failures[i].empty())
      throw DataError("decode failed on line " + std::to_string(i + 1) +
                      ": " + failures[i]);

  write_lines(paths.decoded(), outputs);
}

ErrorProfile profile_from_artifacts(const ExperimentConfig& config,
                                    const Paths& paths) {
  require_artifact(paths.decoded(), "decode");
  const auto hyps = read_lines(paths.decoded());
  const auto refs =
      read_lines(require_input(config.test_target, "test_target"));
  if (hyps.size() != refs.size())
    throw DataError("decoded output and test_target differ in length");
  std::vector<std::pair<std::string, std::string>> pairs;
  for (size_t i = 0; i < hyps.size(); ++i)
    pairs.emplace_back(hyps[i], refs[i]);
  std::set<std::string> vocab;
  for (const auto& line :
       read_lines(require_input(config.train_target, "train_target")))
    for (const auto& w : word_tokenize(line)) vocab.insert(w);
  return error_profile(pairs, vocab);
}

void stage_evaluate(const ExperimentConfig& config, const Paths& paths) {
  const ErrorProfile profile = profile_from_artifacts(config, paths);
  write_file(paths.at("metrics.csv"), metrics_csv(profile.report));
}

void stage_analyze(const ExperimentConfig& config, const Paths& paths) {
  const ErrorProfile profile = profile_from_artifacts(config, paths);
  write_file(paths.at("confusion.csv"), confusion_csv(profile.confusion));
  write_file(paths.at("histogram.csv"), histogram_csv(profile.histogram));
  write_file(paths.at("subst_types.csv"), subst_types_csv(profile.subst));
  std::ostringstream summary;
  summary << summary_text(profile);
  if (fs::exists(paths.channel())) {
    const EmissionParams params = EmissionParams::load(paths.channel(),
                                                       nullptr);
    const Alphabet alphabet = Alphabet::load(paths.alphabet());
    const auto entropies = channel_row_entropies(params);
    std::ostringstream csv;
    csv << "target,entropy_nats\n";
    for (size_t t = 2; t < entropies.size(); ++t) {
      csv.precision(6);
      csv << alphabet.symbol_string(static_cast<SymbolId>(t)) << ","
          << entropies[t] << "\n";
    }
    write_file(paths.at("channel_entropy.csv"), csv.str());
  }
  write_file(paths.at("summary.txt"), summary.str());
}

}  // namespace

bool valid_command(const std::string& command) {
  const auto& all = pipeline_commands();
  return std::find(all.begin(), all.end(), command) != all.end();
}

void run_stage(const ExperimentConfig& config, const std::string& command) {
  if (!valid_command(command))
    throw ConfigError("unknown command '" + command + "'");
  if (!valid_decoder(config.decoder))
    throw ConfigError("unknown decoder '" + config.decoder + "'");
  Paths paths{config.output_dir};
  fs::create_directories(paths.dir);

  const auto run = [&](const std::string& stage) {
    if (stage == "prepare") stage_prepare(config, paths);
    else if (stage == "train-lm") stage_train_lm(config, paths);
    else if (stage == "train-wfst") stage_train_wfst(config, paths);
    else if (stage == "train-seq2seq") stage_train_seq2seq(config, paths);
    else if (stage == "decode") stage_decode(config, paths);
    else if (stage == "evaluate") stage_evaluate(config, paths);
    else if (stage == "analyze") stage_analyze(config, paths);
  };

  if (command == "all") {
    run("prepare");
    if (decoder_uses_wfst(config.decoder)) {
      run("train-lm");
      run("train-wfst");
    }
    if (decoder_uses_seq2seq(config.decoder)) run("train-seq2seq");
    run("decode");
    run("evaluate");
    run("analyze");
  } else {
    run(command);
  }
  write_manifest(config, paths);
}

}  // namespace uct
