#include "rosecdl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rosecdl/errors.hpp"
#include "rosecdl/simd/kernels.hpp"

namespace rosecdl {

SignalTensor::SignalTensor(std::size_t channels, std::size_t length)
    : channels_(channels), length_(length), data_(channels * length, 0.0) {}

SignalTensor::SignalTensor(std::size_t channels, std::size_t length, std::vector<double> data)
    : channels_(channels), length_(length), data_(std::move(data)) {
  if (data_.size() != channels_ * length_) {
    throw DimensionError("SignalTensor: data has " + std::to_string(data_.size()) +
                         " values, expected " + std::to_string(channels_ * length_));
  }
}

AtomTensor::AtomTensor(std::size_t n_atoms, std::size_t channels, std::size_t atom_length)
    : n_atoms_(n_atoms),
      channels_(channels),
      atom_length_(atom_length),
      data_(n_atoms * channels * atom_length, 0.0) {}

AtomTensor::AtomTensor(std::size_t n_atoms, std::size_t channels, std::size_t atom_length,
                       std::vector<double> data)
    : n_atoms_(n_atoms), channels_(channels), atom_length_(atom_length), data_(std::move(data)) {
  if (data_.size() != n_atoms_ * channels_ * atom_length_) {
    throw DimensionError("AtomTensor: data size does not match K x P x L");
  }
}

double AtomTensor::atom_norm(std::size_t k) const noexcept {
  return std::sqrt(squared_norm(atom(k)));
}

bool AtomTensor::within_unit_ball(double tol) const noexcept {
  for (std::size_t k = 0; k < n_atoms_; ++k) {
    if (squared_norm(atom(k)) > 1.0 + tol) return false;
  }
  return true;
}

ActivationMap::ActivationMap(std::size_t n_atoms, std::size_t valid_length)
    : n_atoms_(n_atoms), valid_length_(valid_length), data_(n_atoms * valid_length, 0.0) {}

ActivationMap::ActivationMap(std::size_t n_atoms, std::size_t valid_length,
                             std::vector<double> data)
    : n_atoms_(n_atoms), valid_length_(valid_length), data_(std::move(data)) {
  if (data_.size() != n_atoms_ * valid_length_) {
    throw DimensionError("ActivationMap: data size does not match K x (T - L + 1)");
  }
}

double ActivationMap::l1_norm() const noexcept {
  double s = 0.0;
  for (double v : data_) s += std::fabs(v);
  return s;
}

std::size_t ActivationMap::count_nonzero() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](double v) { return v != 0.0; }));
}

SignalTensor extract_window(const SignalTensor& x, WindowSpec w) {
  if (w.width == 0 || w.start > x.length() || w.width > x.length() - w.start) {
    throw RangeError("extract_window: window [" + std::to_string(w.start) + ", " +
                     std::to_string(w.start + w.width) + ") outside signal of length " +
                     std::to_string(x.length()));
  }
  SignalTensor out(x.channels(), w.width);
  for (std::size_t p = 0; p < x.channels(); ++p) {
    const auto src = x.channel(p).subspan(w.start, w.width);
    std::copy(src.begin(), src.end(), out.channel(p).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return simd::dot(a, b);
}

double squared_norm(std::span<const double> a) noexcept { return simd::dot(a, a); }

bool all_finite(std::span<const double> a) noexcept {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace rosecdl
