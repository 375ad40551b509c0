#pragma once

// Hand-rolled generators and brute-force oracles shared by the unit tests.

#include <cmath>
#include <cstdint>
#include <random>

#include "rosecdl/random.hpp"
#include "rosecdl/tensor.hpp"

namespace rosecdl::test {

inline Rng rng_for(std::uint64_t case_id) { return make_rng(0xC0FFEE, Stream::Dictionary, case_id); }

inline Dictionary random_dictionary(std::size_t K, std::size_t P, std::size_t L, Rng& rng,
                                    bool unit = true) {
  std::normal_distribution<double> g(0.0, 1.0);
  Dictionary d(K, P, L);
  for (double& v : d.values()) v = g(rng);
  if (unit) {
    for (std::size_t k = 0; k < K; ++k) {
      const double n = d.atom_norm(k);
      for (double& v : d.atom(k)) v /= n;
    }
  }
  return d;
}

inline SignalTensor random_signal(std::size_t P, std::size_t T, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  SignalTensor x(P, T);
  for (double& v : x.values()) v = g(rng);
  return x;
}

inline ActivationMap random_code(std::size_t K, std::size_t V, Rng& rng, double density = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution on(density);
  ActivationMap z(K, V);
  for (double& v : z.values()) v = on(rng) ? g(rng) : 0.0;
  return z;
}

inline SignalTensor naive_convolve(const Dictionary& d, const ActivationMap& z) {
  const std::size_t L = d.atom_length(), T = z.valid_length() + L - 1;
  SignalTensor out(d.channels(), T);
  for (std::size_t k = 0; k < d.n_atoms(); ++k)
    for (std::size_t t = 0; t < z.valid_length(); ++t)
      for (std::size_t p = 0; p < d.channels(); ++p)
        for (std::size_t l = 0; l < L; ++l) out(p, t + l) += d(k, p, l) * z(k, t);
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace rosecdl::test
