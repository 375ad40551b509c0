#include "rosecdl/robust_loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "rosecdl/errors.hpp"
#include "rosecdl/io.hpp"

namespace rosecdl {

void ThresholdRule::validate() const {
  if (!std::isfinite(alpha)) throw ConfigError("threshold alpha must be finite");
  if (kind == ThresholdKind::Quantile) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("quantile alpha must lie in (0, 1)");
  } else if (!(alpha > 0.0)) {
    throw ConfigError("z-score / MAD alpha must be > 0");
  }
}

std::size_t OutlierMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

double OutlierMask::outlier_fraction() const noexcept {
  return flags.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(flags.size());
}

std::size_t patch_count(std::size_t length, std::size_t patch_width) noexcept {
  return patch_width == 0 ? 0 : (length + patch_width - 1) / patch_width;
}

PatchErrorSeries patch_errors(const SignalTensor& x, const SignalTensor& recon,
                              std::size_t patch_width) {
  if (x.channels() != recon.channels() || x.length() != recon.length()) {
    throw DimensionError("patch_errors: signal and reconstruction differ in shape");
  }
  if (patch_width == 0 || patch_width > x.length()) {
    throw RangeError("patch_errors: patch width " + std::to_string(patch_width) +
                     " invalid for signal length " + std::to_string(x.length()));
  }
  const std::size_t T = x.length();
  const std::size_t n = patch_count(T, patch_width);
  PatchErrorSeries out;
  out.patch_width = patch_width;
  out.signal_length = T;
  out.starts.resize(n);
  out.errors.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) out.starts[i] = i * patch_width;
  for (std::size_t p = 0; p < x.channels(); ++p) {
    const auto xp = x.channel(p);
    const auto rp = recon.channel(p);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b = i * patch_width, e = std::min(T, b + patch_width);
      double s = 0.0;
      for (std::size_t t = b; t < e; ++t) {
        const double d = xp[t] - rp[t];
        s += d * d;
      }
      out.errors[i] += 0.5 * s;
    }
  }
  return out;
}

double median_lower(std::vector<double> values) {
  if (values.empty()) throw InsufficientDataError("median of an empty set");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

double compute_threshold(std::span<const double> errors, const ThresholdRule& rule) {
  rule.validate();
  const std::size_t n = errors.size();
  if (n < 2) {
    throw InsufficientDataError("compute_threshold: need at least 2 errors, got " +
                                std::to_string(n));
  }
  switch (rule.kind) {
    case ThresholdKind::Quantile: {
      std::vector<double> sorted(errors.begin(), errors.end());
      std::sort(sorted.begin(), sorted.end());
      // Guard against (1 - alpha) * n landing a rounding error above an integer.
      const double pos = (1.0 - rule.alpha) * static_cast<double>(n);
      auto rank = static_cast<std::size_t>(std::ceil(pos - 1e-9));
      rank = std::clamp<std::size_t>(rank, 1, n);
      return sorted[rank - 1];
    }
    case ThresholdKind::ZScore: {
      const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(n);
      double var = 0.0;
      for (double e : errors) var += (e - mean) * (e - mean);
      var /= static_cast<double>(n);
      return mean + rule.alpha * std::sqrt(var);
    }
    case ThresholdKind::Mad: {
      std::vector<double> values(errors.begin(), errors.end());
      const double med = median_lower(values);
      for (double& v : values) v = std::fabs(v - med);
      const double mad = median_lower(std::move(values));
      return med + rule.alpha * mad / 0.6745;
    }
  }
  return 0.0;
}

double compute_threshold(const PatchErrorSeries& errors, const ThresholdRule& rule) {
  return compute_threshold(std::span<const double>(errors.errors), rule);
}

OutlierMask build_mask(const PatchErrorSeries& errors, double beta) {
  OutlierMask mask;
  mask.patch_width = errors.patch_width;
  mask.threshold_used = beta;
  mask.flags.resize(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) mask.flags[i] = errors.errors[i] > beta;
  return mask;
}

namespace {

void check_mask(const SignalTensor& x, const SignalTensor& recon, const OutlierMask& mask) {
  if (x.channels() != recon.channels() || x.length() != recon.length()) {
    throw DimensionError("signal and reconstruction differ in shape");
  }
  if (mask.patch_width == 0 || mask.size() != patch_count(x.length(), mask.patch_width)) {
    throw DimensionError("outlier mask does not match the signal's patch grid");
  }
}

}  // namespace

double trimmed_objective(const SignalTensor& x, const SignalTensor& recon,
                         const OutlierMask& mask, double z_l1, double lambda) {
  check_mask(x, recon, mask);
  const std::size_t T = x.length(), W = mask.patch_width;
  double data = 0.0;
  for (std::size_t p = 0; p < x.channels(); ++p) {
    const auto xp = x.channel(p);
    const auto rp = recon.channel(p);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask.flags[i]) continue;
      const std::size_t b = i * W, e = std::min(T, b + W);
      double s = 0.0;
      for (std::size_t t = b; t < e; ++t) {
        const double d = xp[t] - rp[t];
        s += d * d;
      }
      data += 0.5 * s;
    }
  }
  return data / static_cast<double>(W) + lambda * z_l1;
}

SignalTensor masked_residual(const SignalTensor& x, const SignalTensor& recon,
                             const OutlierMask& mask) {
  check_mask(x, recon, mask);
  SignalTensor out(x.channels(), x.length());
  const std::size_t T = x.length(), W = mask.patch_width;
  for (std::size_t p = 0; p < x.channels(); ++p) {
    const auto xp = x.channel(p);
    const auto rp = recon.channel(p);
    auto op = out.channel(p);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask.flags[i]) continue;
      const std::size_t b = i * W, e = std::min(T, b + W);
      for (std::size_t t = b; t < e; ++t) op[t] = rp[t] - xp[t];
    }
  }
  return out;
}

SignalTensor apply_mask(const SignalTensor& x, const OutlierMask& mask) {
  check_mask(x, x, mask);
  SignalTensor out = x;
  const std::size_t T = x.length(), W = mask.patch_width;
  for (std::size_t p = 0; p < x.channels(); ++p) {
    auto op = out.channel(p);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask.flags[i]) continue;
      std::fill(op.begin() + static_cast<std::ptrdiff_t>(i * W),
                op.begin() + static_cast<std::ptrdiff_t>(std::min(T, (i + 1) * W)), 0.0);
    }
  }
  return out;
}

void write_mask_csv(const std::filesystem::path& path, const PatchErrorSeries& errors,
                    const OutlierMask& mask) {
  if (errors.size() != mask.size()) throw DimensionError("write_mask_csv: size mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "patch_start,patch_end,error,is_outlier\n";
  char buf[64];
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const std::size_t next = std::min(errors.starts[i] + errors.patch_width, errors.signal_length);
    std::snprintf(buf, sizeof buf, "%.17g", errors.errors[i]);
    out << errors.starts[i] << ',' << next << ',' << buf << ',' << (mask.flags[i] ? 1 : 0)
        << '\n';
  }
}

void write_mask_rst1(const std::filesystem::path& path, const OutlierMask& mask) {
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask.flags[i] ? 1 : 0;
  io::write_rst1_u8(path, {mask.size()}, bytes);
}

}  // namespace rosecdl
