#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "uct/config.hpp"
#include "uct/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"unsupervised character-level transduction pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string decoder;
  int beam = -1, nbest = -1, workers = -1;

  for (const auto& name : uct::pipeline_commands()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " stage");
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--decoder", decoder,
                    "wfst | seq2seq | rerank-wfst | rerank-seq2seq | poe");
    sub->add_option("--beam", beam, "product-of-experts beam size");
    sub->add_option("--nbest", nbest, "rerank candidate count");
    sub->add_option("--workers", workers, "sentence-level decode threads");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    uct::ExperimentConfig config = uct::parse_config(config_path);
    if (!decoder.empty()) config.decoder = decoder;
    if (beam > 0) config.beam = beam;
    if (nbest > 0) config.nbest = nbest;
    if (workers > 0) config.workers = workers;
    uct::run_stage(config, command);
  } catch (const uct::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const uct::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const uct::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
