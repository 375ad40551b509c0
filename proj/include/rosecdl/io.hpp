#pragma once

// On-disk formats.
//
// RST1: the four bytes "RST1", one u8 ndim, ndim little-endian u64 dims, then
// the row-major payload. The payload is little-endian f64 for numeric
// tensors and one byte per element for boolean masks; readers tell the two
// apart from the file size.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rosecdl/tensor.hpp"

namespace rosecdl::io {

struct RawTensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

struct RawMask {
  std::vector<std::uint64_t> dims;
  std::vector<std::uint8_t> values;
};

void write_rst1(const std::filesystem::path& path, const std::vector<std::uint64_t>& dims,
                std::span<const double> values);
void write_rst1_u8(const std::filesystem::path& path, const std::vector<std::uint64_t>& dims,
                   std::span<const std::uint8_t> values);
RawTensor read_rst1(const std::filesystem::path& path);
RawMask read_rst1_u8(const std::filesystem::path& path);

void write_signal(const std::filesystem::path& path, const SignalTensor& x);
/// Accepts 1-D (single channel) or 2-D RST1 tensors.
SignalTensor read_signal(const std::filesystem::path& path);

void write_dictionary(const std::filesystem::path& path, const Dictionary& d);
Dictionary read_dictionary(const std::filesystem::path& path);

void write_activations(const std::filesystem::path& path, const ActivationMap& z);
ActivationMap read_activations(const std::filesystem::path& path);

/// One row per channel, comma separated.
SignalTensor read_signal_csv(const std::filesystem::path& path);
void write_signal_csv(const std::filesystem::path& path, const SignalTensor& x);

/// Dispatches on extension: ".csv" goes through the CSV reader, anything else RST1.
SignalTensor load_signal(const std::filesystem::path& path);

}  // namespace rosecdl::io
