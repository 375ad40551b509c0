#include "rosecdl/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "rosecdl/errors.hpp"

namespace rosecdl::io {
namespace {

constexpr std::array<char, 4> kMagic{'R', 'S', 'T', '1'};
static_assert(std::endian::native == std::endian::little,
              "RST1 I/O assumes a little-endian host");

std::uint64_t element_count(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void write_header(std::ofstream& out, const std::vector<std::uint64_t>& dims) {
  if (dims.size() > 255) throw IoError("RST1: too many dimensions");
  out.write(kMagic.data(), kMagic.size());
  const auto ndim = static_cast<std::uint8_t>(dims.size());
  out.write(reinterpret_cast<const char*>(&ndim), 1);
  out.write(reinterpret_cast<const char*>(dims.data()),
            static_cast<std::streamsize>(dims.size() * sizeof(std::uint64_t)));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

struct Header {
  std::vector<std::uint64_t> dims;
  std::uint64_t payload_bytes = 0;
};

Header read_header(std::ifstream& in, const std::filesystem::path& path) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError(path.string() + ": not an RST1 file");
  std::uint8_t ndim = 0;
  in.read(reinterpret_cast<char*>(&ndim), 1);
  Header h;
  h.dims.resize(ndim);
  in.read(reinterpret_cast<char*>(h.dims.data()),
          static_cast<std::streamsize>(ndim * sizeof(std::uint64_t)));
  if (!in) throw IoError(path.string() + ": truncated RST1 header");
  const auto total = std::filesystem::file_size(path);
  const std::uint64_t header_bytes = 5 + std::uint64_t{ndim} * 8;
  h.payload_bytes = total - header_bytes;
  return h;
}

}  // namespace

void write_rst1(const std::filesystem::path& path, const std::vector<std::uint64_t>& dims,
                std::span<const double> values) {
  if (element_count(dims) != values.size()) throw DimensionError("RST1: dims do not match payload");
  auto out = open_out(path);
  write_header(out, dims);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_rst1_u8(const std::filesystem::path& path, const std::vector<std::uint64_t>& dims,
                   std::span<const std::uint8_t> values) {
  if (element_count(dims) != values.size()) throw DimensionError("RST1: dims do not match payload");
  auto out = open_out(path);
  write_header(out, dims);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

RawTensor read_rst1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Header h = read_header(in, path);
  const std::uint64_t n = element_count(h.dims);
  if (h.payload_bytes != n * sizeof(double)) {
    throw IoError(path.string() + ": payload is not " + std::to_string(n) + " f64 values");
  }
  RawTensor t{std::move(h.dims), std::vector<double>(n)};
  in.read(reinterpret_cast<char*>(t.values.data()), static_cast<std::streamsize>(n * 8));
  if (!in) throw IoError(path.string() + ": truncated payload");
  return t;
}

RawMask read_rst1_u8(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Header h = read_header(in, path);
  const std::uint64_t n = element_count(h.dims);
  if (h.payload_bytes != n) {
    throw IoError(path.string() + ": payload is not " + std::to_string(n) + " u8 values");
  }
  RawMask m{std::move(h.dims), std::vector<std::uint8_t>(n)};
  in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(n));
  if (!in) throw IoError(path.string() + ": truncated payload");
  return m;
}

void write_signal(const std::filesystem::path& path, const SignalTensor& x) {
  write_rst1(path, {x.channels(), x.length()}, x.values());
}

SignalTensor read_signal(const std::filesystem::path& path) {
  RawTensor t = read_rst1(path);
  if (t.dims.size() == 1) return SignalTensor(1, t.dims[0], std::move(t.values));
  if (t.dims.size() != 2) throw DimensionError(path.string() + ": signal must be 1-D or 2-D");
  return SignalTensor(t.dims[0], t.dims[1], std::move(t.values));
}

void write_dictionary(const std::filesystem::path& path, const Dictionary& d) {
  write_rst1(path, {d.n_atoms(), d.channels(), d.atom_length()}, d.values());
}

Dictionary read_dictionary(const std::filesystem::path& path) {
  RawTensor t = read_rst1(path);
  if (t.dims.size() != 3) throw DimensionError(path.string() + ": dictionary must be 3-D");
  return Dictionary(t.dims[0], t.dims[1], t.dims[2], std::move(t.values));
}

void write_activations(const std::filesystem::path& path, const ActivationMap& z) {
  write_rst1(path, {z.n_atoms(), z.valid_length()}, z.values());
}

ActivationMap read_activations(const std::filesystem::path& path) {
  RawTensor t = read_rst1(path);
  if (t.dims.size() != 2) throw DimensionError(path.string() + ": activations must be 2-D");
  return ActivationMap(t.dims[0], t.dims[1], std::move(t.values));
}

SignalTensor read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      if (first == std::string::npos) throw IoError(path.string() + ": empty CSV cell");
      double v = 0.0;
      const char* b = cell.data() + first;
      const char* e = cell.data() + last + 1;
      auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e) {
        throw IoError(path.string() + ": bad number '" + cell + "' on row " + std::to_string(rows + 1));
      }
      values.push_back(v);
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw DimensionError(path.string() + ": ragged CSV rows");
    ++rows;
  }
  if (rows == 0 || cols == 0) throw IoError(path.string() + ": empty CSV");
  return SignalTensor(rows, cols, std::move(values));
}

void write_signal_csv(const std::filesystem::path& path, const SignalTensor& x) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  for (std::size_t p = 0; p < x.channels(); ++p) {
    const auto row = x.channel(p);
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (t) out << ',';
      out << row[t];
    }
    out << '\n';
  }
}

SignalTensor load_signal(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_signal_csv(path);
  return read_signal(path);
}

}  // namespace rosecdl::io
