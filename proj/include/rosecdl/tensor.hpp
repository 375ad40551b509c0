#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rosecdl {

/// Dense multichannel 1D signal, row-major (channels x length).
class SignalTensor {
 public:
  SignalTensor() = default;
  SignalTensor(std::size_t channels, std::size_t length);
  SignalTensor(std::size_t channels, std::size_t length, std::vector<double> data);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> channel(std::size_t p) noexcept {
    return {data_.data() + p * length_, length_};
  }
  std::span<const double> channel(std::size_t p) const noexcept {
    return {data_.data() + p * length_, length_};
  }
  double& operator()(std::size_t p, std::size_t t) noexcept { return data_[p * length_ + t]; }
  double operator()(std::size_t p, std::size_t t) const noexcept {
    return data_[p * length_ + t];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const SignalTensor&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::vector<double> data_;
};

/// K atoms of shape channels x atom_length. Used both for dictionaries and
/// for dictionary-shaped gradients.
class AtomTensor {
 public:
  AtomTensor() = default;
  AtomTensor(std::size_t n_atoms, std::size_t channels, std::size_t atom_length);
  AtomTensor(std::size_t n_atoms, std::size_t channels, std::size_t atom_length,
             std::vector<double> data);

  std::size_t n_atoms() const noexcept { return n_atoms_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t atom_length() const noexcept { return atom_length_; }
  std::size_t atom_size() const noexcept { return channels_ * atom_length_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> atom(std::size_t k) noexcept {
    return {data_.data() + k * atom_size(), atom_size()};
  }
  std::span<const double> atom(std::size_t k) const noexcept {
    return {data_.data() + k * atom_size(), atom_size()};
  }
  std::span<double> row(std::size_t k, std::size_t p) noexcept {
    return {data_.data() + k * atom_size() + p * atom_length_, atom_length_};
  }
  std::span<const double> row(std::size_t k, std::size_t p) const noexcept {
    return {data_.data() + k * atom_size() + p * atom_length_, atom_length_};
  }
  double& operator()(std::size_t k, std::size_t p, std::size_t l) noexcept {
    return data_[k * atom_size() + p * atom_length_ + l];
  }
  double operator()(std::size_t k, std::size_t p, std::size_t l) const noexcept {
    return data_[k * atom_size() + p * atom_length_ + l];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_shape(const AtomTensor& other) const noexcept {
    return n_atoms_ == other.n_atoms_ && channels_ == other.channels_ &&
           atom_length_ == other.atom_length_;
  }

  double atom_norm(std::size_t k) const noexcept;
  /// True when every atom satisfies ||d_k||^2 <= 1 + tol.
  bool within_unit_ball(double tol = 1e-12) const noexcept;

  bool operator==(const AtomTensor&) const = default;

 private:
  std::size_t n_atoms_ = 0;
  std::size_t channels_ = 0;
  std::size_t atom_length_ = 0;
  std::vector<double> data_;
};

using Dictionary = AtomTensor;
using DictionaryGradient = AtomTensor;

/// Activation coefficients, K x (T - L + 1).
class ActivationMap {
 public:
  ActivationMap() = default;
  ActivationMap(std::size_t n_atoms, std::size_t valid_length);
  ActivationMap(std::size_t n_atoms, std::size_t valid_length, std::vector<double> data);

  std::size_t n_atoms() const noexcept { return n_atoms_; }
  std::size_t valid_length() const noexcept { return valid_length_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> atom(std::size_t k) noexcept {
    return {data_.data() + k * valid_length_, valid_length_};
  }
  std::span<const double> atom(std::size_t k) const noexcept {
    return {data_.data() + k * valid_length_, valid_length_};
  }
  double& operator()(std::size_t k, std::size_t t) noexcept {
    return data_[k * valid_length_ + t];
  }
  double operator()(std::size_t k, std::size_t t) const noexcept {
    return data_[k * valid_length_ + t];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double l1_norm() const noexcept;
  std::size_t count_nonzero() const noexcept;

  bool operator==(const ActivationMap&) const = default;

 private:
  std::size_t n_atoms_ = 0;
  std::size_t valid_length_ = 0;
  std::vector<double> data_;
};

/// Window [start, start + width) of a signal.
struct WindowSpec {
  std::size_t start = 0;
  std::size_t width = 0;

  bool operator==(const WindowSpec&) const = default;
};

SignalTensor extract_window(const SignalTensor& x, WindowSpec w);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_norm(std::span<const double> a) noexcept;
bool all_finite(std::span<const double> a) noexcept;

}  // namespace rosecdl
