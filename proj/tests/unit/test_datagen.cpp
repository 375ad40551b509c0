#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "rosecdl/convolution.hpp"
#include "rosecdl/datagen.hpp"
#include "rosecdl/errors.hpp"

using namespace rosecdl;
using namespace rosecdl::test;

namespace {

SimSpec short_spec() {
  SimSpec spec;
  spec.length = 5000;
  spec.n_signals = 3;
  spec.seed = 11;
  return spec;
}

std::size_t count_nonzero_atom(const ActivationMap& z, std::size_t k) {
  std::size_t n = 0;
  for (double v : z.atom(k)) n += v != 0.0;
  return n;
}

}  // namespace

TEST_CASE("dictionary construction") {
  const SimSpec spec;
  Rng a = make_rng(spec.seed, Stream::Dictionary), b = make_rng(spec.seed, Stream::Dictionary);
  const Dictionary d = make_dictionary(spec, a);
  CHECK(d == make_dictionary(spec, b));
  CHECK(d.n_atoms() == 2);
  CHECK(d.channels() == 2);
  CHECK(d.atom_length() == 64);
  for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(d.atom_norm(k) - 1.0) <= 1e-12);
}

TEST_CASE("activations") {
  SimSpec spec;
  spec.length = 50063;  // valid length 5 * 10^4
  Rng rng = make_rng(5, Stream::Activations);
  const ActivationMap z = make_activations(spec, 2, spec.sparsity, rng);
  for (std::size_t k = 0; k < 2; ++k) {
    const double n = count_nonzero_atom(z, k);
    CHECK(std::abs(n - 200.0) <= 3.0 * std::sqrt(200.0));
    long last = -1000000;
    for (std::size_t t = 0; t < z.valid_length(); ++t) {
      if (z(k, t) == 0.0) continue;
      CHECK(static_cast<long>(t) - last >= 64);
      CHECK(z(k, t) >= 0.5);
      CHECK(z(k, t) <= 1.5);
      last = static_cast<long>(t);
    }
  }
  CHECK(make_activations(spec, 2, 0.0, rng).count_nonzero() == 0);

  spec.constant_amplitude = true;
  spec.min_separation = false;
  const ActivationMap ones = make_activations(spec, 1, 0.01, rng);
  for (double v : ones.values()) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("correlated mixing") {
  Rng rng = rng_for(1);
  for (double c : {0.0, 0.3, 0.9}) {
    const Dictionary ref = random_dictionary(1, 1, 12, rng), dir = random_dictionary(1, 1, 12, rng);
    const auto m = mix_with_correlation(ref.atom(0), dir.atom(0), c);
    CHECK(squared_norm(m) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(m, ref.atom(0)) == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("noiseless corpus reconstructs from the truth") {
  SimSpec spec = short_spec();
  spec.noise_sigma = 0.0;
  const SimCorpus c = synthesize(spec);
  REQUIRE(c.signals.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(c.signals[i].channels() == 2);
    CHECK(c.signals[i].length() == 5000);
    const SignalTensor r = convolve(c.truth.dictionary, c.truth.activations[i]);
    CHECK(max_abs_diff(r.values(), c.signals[i].values()) <= 1e-12);
  }
  CHECK(c.truth.rare_activations.empty());
}

TEST_CASE("noise level and determinism") {
  SimSpec spec = short_spec();
  spec.length = 50000;
  spec.n_signals = 2;
  const SimCorpus c = synthesize(spec);
  double s2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const SignalTensor r = convolve(c.truth.dictionary, c.truth.activations[i]);
    for (std::size_t j = 0; j < r.size(); ++j) {
      s2 += std::pow(c.signals[i].values()[j] - r.values()[j], 2);
      ++n;
    }
  }
  CHECK(std::abs(std::sqrt(s2 / n) - 0.1) <= 0.005);

  const SimCorpus again = synthesize(spec, 4);
  for (std::size_t i = 0; i < 2; ++i) CHECK(again.signals[i] == c.signals[i]);
  spec.seed += 1;
  CHECK_FALSE(synthesize(spec).signals[0] == c.signals[0]);
}

TEST_CASE("rare events and artifacts") {
  SimSpec spec = short_spec();
  spec.length = 50000;
  spec.n_signals = 10;
  spec.rare = RareSpec{1, 0.1, 0.3, 1e-4, 5.0};
  const SimCorpus c = synthesize(spec);
  CHECK(c.truth.rare_dictionary.n_atoms() == 1);
  CHECK(std::abs(c.truth.rare_dictionary.atom_norm(0) - 1.0) <= 1e-12);
  CHECK(dot(c.truth.rare_dictionary.atom(0), c.truth.dictionary.atom(0)) == doctest::Approx(0.3).epsilon(1e-12));

  double common = 0.0, rare = 0.0;
  std::size_t artifacts = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    common += count_nonzero_atom(c.truth.activations[i], 0);
    rare += c.truth.rare_activations[i].count_nonzero();
    for (bool b : c.truth.artifact_mask[i]) artifacts += b;
    // Every rare activation is covered by the rare mask.
    const auto& z = c.truth.rare_activations[i];
    for (std::size_t t = 0; t < z.valid_length(); ++t)
      if (z(0, t) != 0.0)
        for (std::size_t l = 0; l < 64; ++l) CHECK(c.truth.rare_mask[i][t + l]);
    const auto any = anomaly_sample_mask(c.truth, i);
    for (std::size_t s = 0; s < any.size(); ++s)
      CHECK(any[s] == (c.truth.rare_mask[i][s] || c.truth.artifact_mask[i][s]));
  }
  // Rare rate relative to the common atom: 0.1 within four binomial standard errors.
  const double ratio = rare / common;
  CHECK(std::abs(ratio - 0.1) <= 4.0 * std::sqrt(0.1 * 0.9 / common) + 0.01);
  // About 50 bursts of 32 samples.
  CHECK(artifacts > 20 * 32);
  CHECK(artifacts < 90 * 32);
}

TEST_CASE("sample to patch masks") {
  const std::vector<bool> s{false, false, true, false, false, false, false, true};
  const OutlierMask m = patch_mask_from_samples(s, 2);
  CHECK(m.flags == std::vector<bool>{false, true, false, true});
  CHECK(m.patch_width == 2);
}

TEST_CASE("spec validation") {
  auto bad = [](auto mutate) {
    SimSpec s;
    mutate(s);
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(synthesize(s), ConfigError);
  };
  bad([](SimSpec& s) { s.n_signals = 0; });
  bad([](SimSpec& s) { s.length = 10; });
  bad([](SimSpec& s) { s.sparsity = 0.0; });
  bad([](SimSpec& s) { s.sparsity = 0.1; });
  bad([](SimSpec& s) { s.noise_sigma = -1.0; });
  bad([](SimSpec& s) { s.rare = RareSpec{3, 0.1, 0.3, 0.0, 5.0}; });
  bad([](SimSpec& s) { s.rare = RareSpec{1, 0.0, 0.3, 0.0, 5.0}; });
  bad([](SimSpec& s) { s.rare = RareSpec{1, 0.1, 1.0, 0.0, 5.0}; });
}
