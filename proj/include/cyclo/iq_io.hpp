#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cyclo/signal_model.hpp"

namespace cyclo {

// Multi-byte sample words are little-endian on disk.
static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

enum class SampleFormat { cf32le };

struct IqFileMeta {
  double sample_rate_hz = 0.0;
  std::optional<double> center_freq_hz;
  SampleFormat sample_format = SampleFormat::cf32le;
  std::int64_t sample_count = 0;
};

/// Sidecar path used when none is given: "<data path>.meta".
inline std::string default_meta_path(const std::string& data_path) { return data_path + ".meta"; }

namespace detail {

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  return v;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& text, const std::string& path) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw FormatError("'" + path + "': bad value for " + key + ": '" + text + "'");
  return v;
}

}  // namespace detail

/// Parses `key=value` sidecar text. Blank lines and lines starting with '#'
/// are ignored; unknown keys are ignored.
inline IqFileMeta read_meta(const std::string& meta_path) {
  std::ifstream is(meta_path);
  if (!is) throw FormatError("missing metadata file '" + meta_path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("'" + meta_path + "': malformed line '" + line + "'");
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  IqFileMeta meta;
  if (auto it = kv.find("format"); it != kv.end() && it->second != "cf32le")
    throw UnsupportedFormatError("'" + meta_path + "': unsupported sample format '" + it->second + "'");
  auto rate = kv.find("sample_rate_hz");
  if (rate == kv.end()) throw FormatError("'" + meta_path + "': sample_rate_hz missing");
  meta.sample_rate_hz = detail::parse_number("sample_rate_hz", rate->second, meta_path);
  if (!(meta.sample_rate_hz > 0.0) || !std::isfinite(meta.sample_rate_hz))
    throw FormatError("'" + meta_path + "': sample_rate_hz must be > 0");
  if (auto it = kv.find("center_freq_hz"); it != kv.end() && !it->second.empty())
    meta.center_freq_hz = detail::parse_number("center_freq_hz", it->second, meta_path);
  if (auto it = kv.find("sample_count"); it != kv.end())
    meta.sample_count = static_cast<std::int64_t>(detail::parse_number("sample_count", it->second, meta_path));
  else
    meta.sample_count = -1;
  return meta;
}

inline void write_meta(const std::string& meta_path, const IqFileMeta& meta) {
  std::ofstream os(meta_path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + meta_path + "' for writing");
  char buf[128];
  os << "format=cf32le\n";
  std::snprintf(buf, sizeof buf, "sample_rate_hz=%.17g\n", meta.sample_rate_hz);
  os << buf;
  if (meta.center_freq_hz) {
    std::snprintf(buf, sizeof buf, "center_freq_hz=%.17g\n", *meta.center_freq_hz);
    os << buf;
  }
  os << "sample_count=" << meta.sample_count << "\n";
  if (!os) throw IoError("write failed for '" + meta_path + "'");
}

/// Reads interleaved float32 I/Q (little-endian) plus its sidecar. The whole
/// file is validated before a buffer is returned.
inline IqBuffer load_iq(const std::string& path, const std::string& meta_path) {
  const IqFileMeta meta = read_meta(meta_path);
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) throw FormatError("missing data file '" + path + "'");
  if (bytes % 8 != 0)
    throw FormatError("'" + path + "': byte length " + std::to_string(bytes) + " is not a multiple of 8 (truncated?)");
  const auto count = static_cast<std::int64_t>(bytes / 8);
  if (meta.sample_count >= 0 && meta.sample_count != count)
    throw FormatError("'" + path + "': sidecar sample_count " + std::to_string(meta.sample_count) +
                      " does not match file (" + std::to_string(count) + " samples)");

  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  std::vector<std::uint32_t> words(static_cast<std::size_t>(2 * count));
  is.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::uint64_t>(is.gcount()) != bytes) throw FormatError("'" + path + "': short read");

  std::vector<cplx> samples(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto re = std::bit_cast<float>(detail::to_le(words[2 * i]));
    const auto im = std::bit_cast<float>(detail::to_le(words[2 * i + 1]));
    samples[i] = {re, im};
  }
  return IqBuffer(std::move(samples), meta.sample_rate_hz, meta.center_freq_hz);
}

inline IqBuffer load_iq(const std::string& path) { return load_iq(path, default_meta_path(path)); }

/// Writes samples as cf32le (values rounded to float) and the sidecar.
inline void save_iq(const IqBuffer& buf, const std::string& path, const std::string& meta_path) {
  std::vector<std::uint32_t> words(2 * buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    words[2 * i] = detail::to_le(std::bit_cast<std::uint32_t>(static_cast<float>(buf[i].real())));
    words[2 * i + 1] = detail::to_le(std::bit_cast<std::uint32_t>(static_cast<float>(buf[i].imag())));
  }
  {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
    if (!os) throw IoError("write failed for '" + path + "'");
  }
  write_meta(meta_path, {buf.sample_rate_hz(), buf.center_freq_hz(), SampleFormat::cf32le,
                         static_cast<std::int64_t>(buf.size())});
}

inline void save_iq(const IqBuffer& buf, const std::string& path) { save_iq(buf, path, default_meta_path(path)); }

// ---------------------------------------------------------------------------
// Decimation
// ---------------------------------------------------------------------------

inline constexpr double kDecimationStopbandDb = 60.0;

/// Kaiser-windowed sinc low-pass, cutoff 0.8 * pi / factor, unit DC gain.
/// Transition spans 0.6 pi/factor .. pi/factor; odd length.
inline std::vector<double> decimation_filter(int factor) {
  if (factor < 1) throw ArgumentError("decimation_filter: factor must be >= 1");
  const double cutoff = 0.8 * std::numbers::pi / factor;  // rad/sample
  const double transition = 0.4 * std::numbers::pi / factor;
  const double a = kDecimationStopbandDb;
  const double beta = 0.1102 * (a - 8.7);
  auto taps = static_cast<int>(std::ceil((a - 8.0) / (2.285 * transition))) + 1;
  if (taps % 2 == 0) ++taps;
  const int half = taps / 2;
  std::vector<double> h(static_cast<std::size_t>(taps));
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  double sum = 0.0;
  for (int n = -half; n <= half; ++n) {
    const double x = n == 0 ? cutoff / std::numbers::pi : std::sin(cutoff * n) / (std::numbers::pi * n);
    const double r = static_cast<double>(n) / half;
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    sum += h[static_cast<std::size_t>(n + half)] = x * w;
  }
  for (auto& v : h) v /= sum;
  return h;
}

/// Low-pass filter then keep every factor-th sample. The filter is applied
/// zero-phase (centred), so output sample j is aligned with input sample j*factor.
inline IqBuffer decimate(const IqBuffer& buf, int factor) {
  if (factor < 1) throw ArgumentError("decimate: factor must be >= 1");
  if (factor == 1) return buf;
  const std::vector<double> h = decimation_filter(factor);
  const auto half = static_cast<std::int64_t>(h.size() / 2);
  const auto n_in = static_cast<std::int64_t>(buf.size());
  const std::int64_t n_out = (n_in + factor - 1) / factor;
  const auto& x = buf.samples();
  std::vector<cplx> y(static_cast<std::size_t>(n_out));
  for (std::int64_t j = 0; j < n_out; ++j) {
    const std::int64_t c = j * factor;
    cplx acc{};
    const std::int64_t lo = std::max<std::int64_t>(0, c - half);
    const std::int64_t hi = std::min<std::int64_t>(n_in - 1, c + half);
    for (std::int64_t m = lo; m <= hi; ++m) acc += h[static_cast<std::size_t>(c - m + half)] * x[static_cast<std::size_t>(m)];
    y[static_cast<std::size_t>(j)] = acc;
  }
  return IqBuffer(std::move(y), buf.sample_rate_hz() / factor, buf.center_freq_hz());
}

}  // namespace cyclo
