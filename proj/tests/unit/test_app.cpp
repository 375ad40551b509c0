#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rosecdl/app/commands.hpp"
#include "rosecdl/app/config.hpp"
#include "rosecdl/errors.hpp"

using namespace rosecdl;
using namespace rosecdl::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / ("rosecdl_unit_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  fs::path config(const json& j, const std::string& name = "config.json") const {
    std::ofstream(dir / name) << j.dump(2);
    return dir / name;
  }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& command, CommandOptions opts) {
  opts.threads = opts.threads == 0 ? 1 : opts.threads;
  std::ostringstream out, err;
  const int code = run_command(command, opts, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

json small_config(const fs::path& corpus) {
  return {{"simulate", {{"length", 3000}, {"n_signals", 2}, {"seed", 5}, {"rare", {{"rare_density", 0.2}, {"artifact_density", 2e-4}}}}},
          {"train", {{"n_iter", 5}, {"n_windows", 4}, {"seed", 5}}},
          {"stage2", {{"n_iter", 3}, {"n_windows", 4}, {"n_atoms", 1}}},
          {"encode", {{"n_fista", 50}}},
          {"paths", {{"corpus", corpus.string()}}}};
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = default_config();
  CHECK(c.simulate.n_signals == 20);
  CHECK(c.simulate.length == 50000);
  CHECK(c.simulate.channels == 2);
  CHECK(c.simulate.n_atoms == 2);
  CHECK(c.simulate.atom_length == 64);
  CHECK(c.simulate.noise_sigma == 0.1);
  REQUIRE(c.train.threshold_rule.has_value());
  CHECK(c.train.threshold_rule->kind == ThresholdKind::Mad);
  CHECK(c.train.threshold_rule->alpha == 3.5);
  CHECK(c.encode.n_fista == 500);
}

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(json{{"train", {{"lambda_frac", 0.3}, {"optimizer", "adam"}, {"init", "gaussian"}}},
                                        {"threshold", {{"kind", "quantile"}, {"alpha", 0.1}}}});
  CHECK(c.train.lambda_frac == 0.3);
  CHECK(c.train.optimizer == OptimizerKind::AdaptiveMoments);
  CHECK(c.train.init == InitKind::Gaussian);
  REQUIRE(c.train.threshold_rule.has_value());
  CHECK(c.train.threshold_rule->kind == ThresholdKind::Quantile);
  CHECK(c.train.threshold_rule->alpha == 0.1);
  CHECK_FALSE(parse_config(json{{"threshold", nullptr}}).train.threshold_rule.has_value());

  CHECK_THROWS_AS(parse_config(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"train", {{"n_iters", 5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"simulate", {{"rare", {{"density", 0.1}}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"train", {{"n_iter", -1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"train", {{"n_iter", "many"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"train", {{"optimizer", "sgd"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"threshold", {{"kind", "iqr"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"threshold", {{"kind", "quantile"}, {"alpha", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"train", {{"lambda_sweep", {0.1, 2.0}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"bench", {{"window_multiples", {0}}}}}), ConfigError);
}

TEST_CASE("overrides") {
  RunConfig c = default_config();
  CommandOptions o;
  o.seed = 42;
  o.lambda_frac = 0.5;
  o.n_iter = 7;
  o.no_trim = true;
  o.threads = 3;
  apply_overrides(c, o);
  CHECK(c.simulate.seed == 42);
  CHECK(c.train.seed == 42);
  CHECK(c.stage2.seed == 42);
  CHECK(c.train.lambda_frac == 0.5);
  CHECK(c.train.n_iter == 7);
  CHECK_FALSE(c.train.threshold_rule.has_value());
  CHECK(c.train.threads == 3);
}

TEST_CASE("simulate: exit codes, clobber refusal and determinism") {
  Workspace w("simulate");
  const fs::path corpus = w.dir / "corpus";
  json j = small_config(corpus);

  CommandOptions o;
  o.config = w.config(j);
  o.output = corpus;
  Run r = run("simulate", o);
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(corpus / "manifest.json"));
  const std::string first = slurp(corpus / "signal_000.rst");
  CHECK_FALSE(first.empty());

  r = run("simulate", o);
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("--force") != std::string::npos);

  o.force = true;
  CHECK(run("simulate", o).code == kExitOk);
  CHECK(slurp(corpus / "signal_000.rst") == first);

  j["simulate"]["n_signals"] = 0;
  CommandOptions zero;
  zero.config = w.config(j, "zero.json");
  zero.output = w.dir / "zero";
  CHECK(run("simulate", zero).code == kExitConfig);

  CommandOptions missing;
  missing.config = w.dir / "nope.json";
  missing.output = w.dir / "x";
  CHECK(run("simulate", missing).code == kExitConfig);
  CHECK(run("frobnicate", o).code == kExitConfig);
}

TEST_CASE("train, sweep, encode, score and detect") {
  Workspace w("pipeline");
  const fs::path corpus = w.dir / "corpus";
  json j = small_config(corpus);
  CommandOptions sim;
  sim.config = w.config(j);
  sim.output = corpus;
  REQUIRE(run("simulate", sim).code == kExitOk);

  CommandOptions tr;
  tr.config = sim.config;
  tr.output = w.dir / "train";
  Run r = run("train", tr);
  REQUIRE(r.code == kExitOk);
  for (const char* f : {"dictionary.rst", "dictionary.json", "report.csv", "summary.json"})
    CHECK(fs::exists(w.dir / "train" / f));
  const json summary = json::parse(slurp(w.dir / "train" / "summary.json"));
  CHECK(summary.contains("recovery"));

  CommandOptions untrimmed = tr;
  untrimmed.output = w.dir / "untrimmed";
  untrimmed.no_trim = true;
  REQUIRE(run("train", untrimmed).code == kExitOk);
  CHECK(slurp(w.dir / "untrimmed" / "report.csv") != slurp(w.dir / "train" / "report.csv"));

  json sweep = j;
  sweep["train"]["lambda_sweep"] = {0.05, 0.1, 0.3, 0.5};
  CommandOptions sw;
  sw.config = w.config(sweep, "sweep.json");
  sw.output = w.dir / "sweep";
  REQUIRE(run("train", sw).code == kExitOk);
  const json s = json::parse(slurp(w.dir / "sweep" / "sweep.json"));
  CHECK(s.size() == 4);
  std::size_t reports = 0;
  for (const auto& e : fs::directory_iterator(w.dir / "sweep"))
    reports += e.is_directory() && fs::exists(e.path() / "report.csv");
  CHECK(reports == 4);

  CommandOptions enc;
  enc.config = sim.config;
  enc.output = w.dir / "encode";
  enc.dictionary = w.dir / "train" / "dictionary.rst";
  CHECK(run("encode", enc).code == kExitOk);
  CHECK(fs::exists(w.dir / "encode" / "encode.json"));

  CommandOptions sc = enc;
  sc.output = w.dir / "score";
  CHECK(run("score", sc).code == kExitOk);
  CHECK(json::parse(slurp(w.dir / "score" / "score.json")).contains("score"));

  CommandOptions det;
  det.config = sim.config;
  det.output = w.dir / "detect";
  REQUIRE(run("detect", det).code == kExitOk);
  const std::string first = slurp(w.dir / "detect" / "summary.json");
  const json ds = json::parse(first);
  CHECK(ds.contains("stage1_f1"));
  CHECK(ds.contains("auc"));
  CHECK((ds.contains("stage2_recovery") || ds.contains("warning")));
  det.force = true;
  det.threads = 2;
  REQUIRE(run("detect", det).code == kExitOk);
  CHECK(slurp(w.dir / "detect" / "summary.json") == first);

  CommandOptions no_corpus;
  no_corpus.config = w.config(json{{"train", {{"n_iter", 1}}}}, "bare.json");
  no_corpus.output = w.dir / "bare";
  no_corpus.corpus = w.dir / "does_not_exist";
  CHECK(run("train", no_corpus).code == kExitConfig);
  no_corpus.corpus.reset();
  CHECK(run("train", no_corpus).code == kExitConfig);
}

#ifdef ROSECDL_CLI_PATH
TEST_CASE("command-line binary") {
  const std::string exe = ROSECDL_CLI_PATH;
  const auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status(exe + " --help") == 0);
  CHECK(status(exe + " train --help") == 0);
  CHECK(status(exe) == kExitConfig);
  CHECK(status(exe + " train /nonexistent/config.json") == kExitConfig);
  CHECK(status(exe + " train --bogus-flag") == kExitConfig);
}
#endif
