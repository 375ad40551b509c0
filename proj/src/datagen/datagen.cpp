#include "rosecdl/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <string>

#include "rosecdl/convolution.hpp"
#include "rosecdl/errors.hpp"
#include "rosecdl/parallel.hpp"

namespace rosecdl {

void SimSpec::validate() const {
  if (channels < 1) throw ConfigError("channels must be >= 1");
  if (n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
  if (atom_length < 2) throw ConfigError("atom_length must be >= 2");
  if (length < atom_length) throw ConfigError("length must be >= atom_length");
  if (n_signals < 1) throw ConfigError("n_signals must be >= 1");
  if (!(sparsity > 0.0 && sparsity < 1.0)) throw ConfigError("sparsity must lie in (0, 1)");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise_sigma must be >= 0");
  const double dead = static_cast<double>(atom_length - 1);
  if (min_separation && sparsity * dead >= 1.0) {
    throw ConfigError("sparsity too high for min_separation with this atom_length");
  }
  if (rare) {
    if (rare->rare_atom_count > n_atoms) throw ConfigError("rare_atom_count exceeds n_atoms");
    if (!(rare->rare_density > 0.0 && rare->rare_density < 1.0)) {
      throw ConfigError("rare_density must lie in (0, 1)");
    }
    if (!(rare->rare_correlation >= 0.0 && rare->rare_correlation < 1.0)) {
      throw ConfigError("rare_correlation must lie in [0, 1)");
    }
    if (!(rare->artifact_density >= 0.0 && rare->artifact_density < 1.0)) {
      throw ConfigError("artifact_density must lie in [0, 1)");
    }
    if (!(rare->artifact_amplitude >= 0.0)) throw ConfigError("artifact_amplitude must be >= 0");
  }
}

namespace {

void normalize(std::span<double> v) {
  const double n = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

void fill_waveform(std::span<double> row, bool sine, Rng& rng) {
  const double L = static_cast<double>(row.size());
  if (sine) {
    std::uniform_real_distribution<double> freq(1.0, 4.0), phase(0.0, 2.0 * std::numbers::pi);
    const double f = freq(rng), ph = phase(rng);
    for (std::size_t l = 0; l < row.size(); ++l) {
      row[l] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(l) / L + ph);
    }
  } else {
    std::uniform_real_distribution<double> center(0.25 * L, 0.75 * L), width(L / 16.0, L / 6.0);
    const double c = center(rng), w = width(rng);
    for (std::size_t l = 0; l < row.size(); ++l) {
      const double u = (static_cast<double>(l) - c) / w;
      row[l] = std::exp(-0.5 * u * u);
    }
  }
}

}  // namespace

Dictionary make_dictionary(const SimSpec& spec, Rng& rng) {
  Dictionary d(spec.n_atoms, spec.channels, spec.atom_length);
  for (std::size_t k = 0; k < spec.n_atoms; ++k) {
    for (std::size_t p = 0; p < spec.channels; ++p) fill_waveform(d.row(k, p), k % 2 == 0, rng);
    normalize(d.atom(k));
  }
  return d;
}

ActivationMap make_activations(const SimSpec& spec, std::size_t n_atoms, double density, Rng& rng) {
  const std::size_t V = spec.length - spec.atom_length + 1;
  ActivationMap z(n_atoms, V);
  const std::size_t dead = spec.min_separation ? spec.atom_length - 1 : 0;
  const double p = density / (1.0 - density * static_cast<double>(dead));
  std::bernoulli_distribution fire(std::min(1.0, p));
  std::uniform_real_distribution<double> amp(0.5, 1.5);
  for (std::size_t k = 0; k < n_atoms; ++k) {
    auto zk = z.atom(k);
    for (std::size_t t = 0; t < V; ++t) {
      if (!fire(rng)) continue;
      zk[t] = spec.constant_amplitude ? 1.0 : amp(rng);
      t += dead;
    }
  }
  return z;
}

std::vector<double> mix_with_correlation(std::span<const double> reference,
                                         std::span<const double> direction, double c) {
  std::vector<double> u(direction.begin(), direction.end());
  const double proj = std::inner_product(u.begin(), u.end(), reference.begin(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] -= proj * reference[i];
  normalize(u);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = c * reference[i] + s * u[i];
  normalize(out);
  return out;
}

namespace {

Dictionary make_rare_dictionary(const SimSpec& spec, const Dictionary& common) {
  const RareSpec& r = *spec.rare;
  Dictionary rare(r.rare_atom_count, spec.channels, spec.atom_length);
  Rng rng = make_rng(spec.seed, Stream::RareAtoms);
  std::vector<double> direction(common.atom_size());
  for (std::size_t k = 0; k < r.rare_atom_count; ++k) {
    // Use the other waveform family so d_b looks like a pattern, not noise.
    const bool sine = k % 2 == 1;
    for (std::size_t p = 0; p < spec.channels; ++p) {
      fill_waveform(std::span<double>(direction).subspan(p * spec.atom_length, spec.atom_length),
                    sine, rng);
    }
    const auto mixed = mix_with_correlation(common.atom(k), direction, r.rare_correlation);
    std::copy(mixed.begin(), mixed.end(), rare.atom(k).begin());
  }
  return rare;
}

void mark_supports(const ActivationMap& z, std::size_t L, std::vector<bool>& mask) {
  for (std::size_t k = 0; k < z.n_atoms(); ++k) {
    const auto zk = z.atom(k);
    for (std::size_t t = 0; t < zk.size(); ++t) {
      if (zk[t] == 0.0) continue;
      for (std::size_t s = t; s < t + L && s < mask.size(); ++s) mask[s] = true;
    }
  }
}

}  // namespace

SimCorpus synthesize(const SimSpec& spec, std::size_t threads) {
  spec.validate();
  SimCorpus out;
  SimTruth& truth = out.truth;
  {
    Rng rng = make_rng(spec.seed, Stream::Dictionary);
    truth.dictionary = make_dictionary(spec, rng);
  }
  if (spec.rare) truth.rare_dictionary = make_rare_dictionary(spec, truth.dictionary);

  const std::size_t n = spec.n_signals, T = spec.length, L = spec.atom_length;
  out.signals.resize(n);
  truth.activations.resize(n);
  truth.rare_mask.assign(n, std::vector<bool>(T, false));
  truth.artifact_mask.assign(n, std::vector<bool>(T, false));
  if (spec.rare) truth.rare_activations.resize(n);

  parallel_for(n, threads, [&](std::size_t i) {
    Rng act_rng = make_rng(spec.seed, Stream::Activations, i);
    truth.activations[i] = make_activations(spec, spec.n_atoms, spec.sparsity, act_rng);
    SignalTensor x = convolve(truth.dictionary, truth.activations[i]);

    if (spec.rare) {
      const RareSpec& r = *spec.rare;
      Rng rare_rng = make_rng(spec.seed, Stream::RareAtoms, i + 1);
      truth.rare_activations[i] =
          make_activations(spec, r.rare_atom_count, r.rare_density * spec.sparsity, rare_rng);
      const SignalTensor xb = convolve(truth.rare_dictionary, truth.rare_activations[i]);
      for (std::size_t j = 0; j < x.size(); ++j) x.values()[j] += xb.values()[j];
      mark_supports(truth.rare_activations[i], L, truth.rare_mask[i]);

      if (r.artifact_density > 0.0) {
        Rng art_rng = make_rng(spec.seed, Stream::Artifacts, i);
        std::bernoulli_distribution start(r.artifact_density);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::size_t burst = std::max<std::size_t>(1, L / 2);
        for (std::size_t t = 0; t + burst <= T; ++t) {
          if (!start(art_rng)) continue;
          for (std::size_t p = 0; p < spec.channels; ++p) {
            for (std::size_t s = t; s < t + burst; ++s) x(p, s) += r.artifact_amplitude * gauss(art_rng);
          }
          for (std::size_t s = t; s < t + burst; ++s) truth.artifact_mask[i][s] = true;
          t += burst - 1;
        }
      }
    }

    if (spec.noise_sigma > 0.0) {
      Rng noise_rng = make_rng(spec.seed, Stream::Noise, i);
      std::normal_distribution<double> gauss(0.0, spec.noise_sigma);
      for (double& v : x.values()) v += gauss(noise_rng);
    }
    out.signals[i] = std::move(x);
  });
  return out;
}

OutlierMask patch_mask_from_samples(const std::vector<bool>& sample_mask, std::size_t patch_width) {
  if (patch_width == 0) throw RangeError("patch width must be >= 1");
  OutlierMask m;
  m.patch_width = patch_width;
  m.flags.assign(patch_count(sample_mask.size(), patch_width), false);
  for (std::size_t t = 0; t < sample_mask.size(); ++t) {
    if (sample_mask[t]) m.flags[t / patch_width] = true;
  }
  return m;
}

std::vector<bool> anomaly_sample_mask(const SimTruth& truth, std::size_t signal) {
  std::vector<bool> m = truth.rare_mask.at(signal);
  const auto& a = truth.artifact_mask.at(signal);
  for (std::size_t t = 0; t < m.size(); ++t) m[t] = m[t] || a[t];
  return m;
}

}  // namespace rosecdl
