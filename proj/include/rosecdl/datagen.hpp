#pragma once

// Synthetic corpora X = D*Z + eps, optionally corrupted by a rare pattern
// and artifact bursts: x = d_a*z_a + d_b*z_b + n + eps.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rosecdl/random.hpp"
#include "rosecdl/robust_loss.hpp"
#include "rosecdl/tensor.hpp"

namespace rosecdl {

struct RareSpec {
  std::size_t rare_atom_count = 1;
  double rare_density = 0.1;        // rare activations per common activation, per atom
  double rare_correlation = 0.3;    // d_b . d_a for the common atom it is mixed from
  double artifact_density = 0.0;    // burst starts per sample
  double artifact_amplitude = 5.0;
};

struct SimSpec {
  std::size_t channels = 2;
  std::size_t length = 50000;
  std::size_t n_atoms = 2;
  std::size_t atom_length = 64;
  double sparsity = 0.004;
  double noise_sigma = 0.1;
  std::size_t n_signals = 20;
  std::uint64_t seed = 0;
  bool min_separation = true;
  bool constant_amplitude = false;  // z = 1 instead of U[0.5, 1.5]
  std::optional<RareSpec> rare;

  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// K unit-norm atoms, alternating sine (1 to 4 cycles, random phase) and
/// Gaussian-bump waveforms, drawn independently per channel.
Dictionary make_dictionary(const SimSpec& spec, Rng& rng);

/// Bernoulli(density) activations per atom and valid position. With
/// min_separation, same-atom activations are at least L apart and the
/// per-position rate is raised to keep the expected density.
ActivationMap make_activations(const SimSpec& spec, std::size_t n_atoms, double density, Rng& rng);

/// Unit atom with d . reference = c: reference mixed with the part of
/// `direction` orthogonal to it.
std::vector<double> mix_with_correlation(std::span<const double> reference,
                                         std::span<const double> direction, double c);

struct SimTruth {
  Dictionary dictionary;                        // common atoms
  Dictionary rare_dictionary;                   // empty unless spec.rare
  std::vector<ActivationMap> activations;       // per signal
  std::vector<ActivationMap> rare_activations;  // per signal; empty unless spec.rare
  std::vector<std::vector<bool>> rare_mask;     // per signal, per sample
  std::vector<std::vector<bool>> artifact_mask; // per signal, per sample
};

struct SimCorpus {
  std::vector<SignalTensor> signals;
  SimTruth truth;
};

/// Deterministic in spec (including seed). Signals are drawn from streams
/// derived from (seed, stream, signal index), so any thread count gives the
/// same corpus.
SimCorpus synthesize(const SimSpec& spec, std::size_t threads = 1);

/// Patch flagged when any of its samples is flagged.
OutlierMask patch_mask_from_samples(const std::vector<bool>& sample_mask, std::size_t patch_width);

/// Union of the rare and artifact sample masks of one signal.
std::vector<bool> anomaly_sample_mask(const SimTruth& truth, std::size_t signal);

}  // namespace rosecdl
