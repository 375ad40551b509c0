#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rosecdl/app/commands.hpp"

int main(int argc, char** argv) {
  using rosecdl::app::CommandOptions;
  CLI::App app{"Robust convolutional dictionary learning for multichannel 1D signals"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string config, corpus, output, dictionary;
  std::uint64_t seed = 0;
  double lambda_frac = 0.0;
  std::size_t n_iter = 0;

  const char* names[][2] = {
      {"simulate", "Generate a synthetic corpus and its ground truth"},
      {"train", "Learn a dictionary (optionally a lambda sweep)"},
      {"encode", "Sparse-code a corpus with a fixed dictionary"},
      {"detect", "Two-stage rare-event detection"},
      {"score", "Recovery score of a dictionary against the corpus truth"},
      {"bench", "Runtime scaling and window-size sweep"}};
  for (const auto& [name, help] : names) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_flag("--force", opts.force, "Overwrite existing outputs");
    sub->add_option("--threads", opts.threads, "Worker threads (default: all cores)");
    sub->add_option("--seed", seed, "Override every seed in the configuration");
    sub->add_option("--corpus", corpus, "Override paths.corpus");
    sub->add_option("--output", output, "Override paths.output");
    sub->add_option("--dictionary", dictionary, "Override paths.dictionary");
    if (std::string(name) == "train") {
      sub->add_flag("--no-trim", opts.no_trim, "Disable outlier trimming");
      sub->add_option("--lambda-frac", lambda_frac, "Override train.lambda_frac");
      sub->add_option("--n-iter", n_iter, "Override train.n_iter");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rosecdl::app::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  opts.config = config;
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--corpus")) opts.corpus = corpus;
  if (sub->count("--output")) opts.output = output;
  if (sub->count("--dictionary")) opts.dictionary = dictionary;
  if (sub->get_name() == "train") {
    if (sub->count("--lambda-frac")) opts.lambda_frac = lambda_frac;
    if (sub->count("--n-iter")) opts.n_iter = n_iter;
  }
  return rosecdl::app::run_command(sub->get_name(), opts, std::cout, std::cerr);
}
