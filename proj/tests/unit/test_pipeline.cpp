#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "rosecdl/convolution.hpp"
#include "rosecdl/datagen.hpp"
#include "rosecdl/errors.hpp"
#include "rosecdl/metrics.hpp"
#include "rosecdl/pipeline.hpp"

using namespace rosecdl;
using namespace rosecdl::test;

TEST_CASE("per-sample scores and flagged residual") {
  PatchErrorSeries e;
  e.patch_width = 2;
  e.signal_length = 5;
  e.starts = {0, 2};
  e.errors = {1.0, 3.0};
  CHECK(broadcast_patch_errors(e) == std::vector<double>{1.0, 1.0, 3.0, 3.0, 0.0});

  Rng rng = rng_for(1);
  const SignalTensor x = random_signal(2, 6, rng), recon = random_signal(2, 6, rng);
  OutlierMask m;
  m.patch_width = 2;
  m.flags = {false, true, false};
  const SignalTensor r = flagged_residual(x, recon, m);
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t t = 0; t < 6; ++t)
      CHECK(r(p, t) == (t == 2 || t == 3 ? x(p, t) - recon(p, t) : 0.0));
}

TEST_CASE("encode above lambda_max gives empty codes") {
  Rng rng = rng_for(2);
  const Dictionary d = random_dictionary(2, 2, 8, rng);
  const std::vector<SignalTensor> corpus{random_signal(2, 200, rng), random_signal(2, 150, rng)};
  double lmax = 0.0;
  for (const auto& x : corpus) lmax = std::max(lmax, lambda_max(x, d));
  SparseCodeConfig cfg;
  cfg.lambda = lmax;
  const auto out = encode_corpus(corpus, d, cfg);
  REQUIRE(out.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(out[i].code.count_nonzero() == 0);
    CHECK(out[i].code.valid_length() == corpus[i].length() - 7);
    const auto& x = corpus[i];
    for (std::size_t j = 0; j < out[i].errors.size(); ++j) {
      double half = 0.0;
      for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t t = out[i].errors.starts[j]; t < std::min(x.length(), out[i].errors.starts[j] + 8); ++t) half += 0.5 * x(p, t) * x(p, t);
      CHECK(out[i].errors.errors[j] == doctest::Approx(half).epsilon(1e-12));
    }
  }
}

TEST_CASE("noiseless encode recovers the true supports") {
  SimSpec spec;
  spec.length = 5000;
  spec.n_signals = 1;
  spec.noise_sigma = 0.0;
  spec.seed = 4;
  const SimCorpus c = synthesize(spec);
  SparseCodeConfig cfg;
  cfg.lambda = 0.01 * lambda_max(c.signals[0], c.truth.dictionary);
  cfg.n_iters = 3000;
  const auto out = encode_corpus(c.signals, c.truth.dictionary, cfg);
  const ActivationMap& z = out[0].code;
  const ActivationMap& truth = c.truth.activations[0];
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const bool got = std::abs(z.values()[i]) > 0.05, want = truth.values()[i] != 0.0;
    tp += got && want;
    fp += got && !want;
    fn += !got && want;
  }
  CHECK(2.0 * tp / (2.0 * tp + fp + fn) > 0.95);
}

TEST_CASE("chunked encode matches the monolithic optimum") {
  SimSpec spec;
  spec.length = 100000;
  spec.n_signals = 1;
  spec.seed = 6;
  const SimCorpus c = synthesize(spec);
  const auto& x = c.signals[0];
  const auto& d = c.truth.dictionary;
  SparseCodeConfig cfg;
  cfg.lambda = 0.3 * lambda_max(x, d);
  cfg.n_iters = 3000;
  const ActivationMap mono = fista(x, d, cfg);
  cfg.n_iters = 300;
  const ActivationMap chunked = encode_chunked(x, d, cfg, 30000, 4);
  const double f_mono = objective(x, d, mono, cfg.lambda).total;
  const double f_chunk = objective(x, d, chunked, cfg.lambda).total;
  CHECK(std::abs(f_mono - f_chunk) <= 1e-6);

  EncodeOptions opts;
  opts.chunk_threshold = 50000;
  opts.chunk_size = 30000;
  const auto via = encode_corpus(c.signals, d, cfg, opts);
  CHECK(via[0].code == chunked);
}

TEST_CASE("null corpus: trimming flags about alpha and stage two learns noise") {
  SimSpec spec;
  spec.length = 10000;
  spec.n_signals = 2;
  spec.seed = 8;
  const SimCorpus c = synthesize(spec);

  TrainConfig s1;
  s1.n_iter = 30;
  s1.n_windows = 10;
  s1.threshold_rule = ThresholdRule::quantile(0.05);
  s1.seed = 1;
  TrainConfig s2 = s1;
  s2.n_atoms = 1;
  s2.threshold_rule.reset();
  s2.n_iter = 20;

  const PipelineResult r = detect_rare_events(c.signals, s1, s2);
  std::size_t flagged = 0, total = 0;
  for (const auto& m : r.stage1_mask) {
    flagged += m.count();
    total += m.size();
  }
  CHECK(static_cast<double>(flagged) / total <= 0.05 + 0.02);
  REQUIRE(r.stage1_errors.size() == 2);
  REQUIRE(r.per_sample_scores.size() == 2);
  CHECK(r.per_sample_scores[0].size() == 10000);
  if (!r.nothing_rare) {
    Dictionary d_a(1, 2, 64);
    std::copy_n(c.truth.dictionary.atom(0).begin(), 128, d_a.atom(0).begin());
    CHECK(recovery_score(d_a, r.rare_dict).score < 0.3);
  }

  TrainConfig untrimmed = s1;
  untrimmed.threshold_rule.reset();
  CHECK_THROWS_AS(detect_rare_events(c.signals, untrimmed, s2), ConfigError);
}
