#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "cyclo/rng.hpp"
#include "cyclo/signal_model.hpp"

namespace cyclo {

enum class TimingOffsetMode { none, uniform_first_slot };
enum class SnrReference { post_fading, pre_fading };

/// Block-fading multipath channel with exponential power delay profile,
/// AWGN and optional carrier offset. Taps are one sample apart.
struct ChannelConfig {
  int num_taps = 4;
  double pdp_decay = 5.0;  // sigma^2(p) = B_h exp(-p / pdp_decay)
  double snr_db = std::numeric_limits<double>::infinity();  // +inf disables noise
  TimingOffsetMode timing_offset_mode = TimingOffsetMode::none;
  std::int64_t slot_samples = 0;  // used by uniform_first_slot
  int tap_spacing = 1;  // samples between taps
  double cfo_hz = 0.0;
  SnrReference snr_reference = SnrReference::post_fading;
  std::optional<std::int64_t> output_samples{};  // truncate output (after offset) to this length
  std::uint64_t seed = 0;
};

inline void validate(const ChannelConfig& cfg) {
  if (cfg.num_taps < 1) throw ConfigError("ChannelConfig: num_taps must be >= 1");
  if (!(cfg.pdp_decay > 0.0)) throw ConfigError("ChannelConfig: pdp_decay must be > 0");
  if (std::isnan(cfg.snr_db) || cfg.snr_db == -std::numeric_limits<double>::infinity())
    throw ConfigError("ChannelConfig: snr_db must be finite or +inf");
  if (cfg.timing_offset_mode == TimingOffsetMode::uniform_first_slot && cfg.slot_samples <= 0)
    throw ConfigError("ChannelConfig: slot_samples must be > 0 for uniform timing offset");
  if (cfg.tap_spacing < 1) throw ConfigError("ChannelConfig: tap_spacing must be >= 1");
  if (cfg.output_samples && *cfg.output_samples < 1) throw ConfigError("ChannelConfig: output_samples must be >= 1");
}

/// Normalized tap variances; they sum to one.
inline std::vector<double> pdp_variances(int num_taps, double decay) {
  std::vector<double> v(static_cast<std::size_t>(num_taps));
  double sum = 0.0;
  for (int p = 0; p < num_taps; ++p) sum += v[static_cast<std::size_t>(p)] = std::exp(-p / decay);
  for (auto& x : v) x /= sum;
  return v;
}

inline std::vector<cplx> draw_taps(const ChannelConfig& cfg, Rng& rng) {
  validate(cfg);
  const auto var = pdp_variances(cfg.num_taps, cfg.pdp_decay);
  std::vector<cplx> h(var.size());
  for (std::size_t p = 0; p < h.size(); ++p) h[p] = complex_gaussian(rng, var[p]);
  return h;
}

/// Everything drawn for one channel use, kept for inspection and tests.
struct ChannelRealization {
  IqBuffer output;
  std::vector<cplx> taps;
  std::int64_t timing_offset = 0;
  double signal_power = 0.0;  // at the SNR reference point
  double noise_power = 0.0;   // configured noise variance (0 if disabled)
};

/// y(m) = sum_p h_p x(m + d - p s), s = tap_spacing, [* exp(j 2 pi f_o m T_s)] + n(m), with x
/// zero before its first sample. A timing offset d drops the first d faded
/// samples, so the observation starts d samples into the waveform.
inline ChannelRealization apply_channel_detailed(const IqBuffer& x, const ChannelConfig& cfg) {
  validate(cfg);
  if (x.empty()) throw ArgumentError("apply_channel: empty input buffer");
  Rng rng(cfg.seed);
  ChannelRealization r;
  r.taps = draw_taps(cfg, rng);

  if (cfg.timing_offset_mode == TimingOffsetMode::uniform_first_slot) {
    std::uniform_int_distribution<std::int64_t> u(0, cfg.slot_samples - 1);
    r.timing_offset = u(rng);
  }
  const auto n_in = static_cast<std::int64_t>(x.size());
  if (r.timing_offset >= n_in) throw ArgumentError("apply_channel: timing offset exceeds input length");
  std::int64_t n_out = n_in - r.timing_offset;
  if (cfg.output_samples) {
    if (*cfg.output_samples > n_out)
      throw ArgumentError("apply_channel: input too short for requested output_samples");
    n_out = *cfg.output_samples;
  }

  const auto& in = x.samples();
  std::vector<cplx> y(static_cast<std::size_t>(n_out));
  const auto taps = static_cast<std::int64_t>(r.taps.size());
  const std::int64_t spacing = cfg.tap_spacing;
  for (std::int64_t m = 0; m < n_out; ++m) {
    const std::int64_t src = m + r.timing_offset;
    cplx acc{};
    for (std::int64_t p = 0; p < taps && p * spacing <= src; ++p)
      acc += r.taps[static_cast<std::size_t>(p)] * in[static_cast<std::size_t>(src - p * spacing)];
    y[static_cast<std::size_t>(m)] = acc;
  }

  if (cfg.cfo_hz != 0.0) {
    const double w = 2.0 * std::numbers::pi * cfg.cfo_hz * x.sample_period_s();
    for (std::int64_t m = 0; m < n_out; ++m) y[static_cast<std::size_t>(m)] *= std::polar(1.0, w * static_cast<double>(m));
  }

  r.signal_power = cfg.snr_reference == SnrReference::post_fading
                       ? mean_power(y)
                       : mean_power(in);
  if (std::isfinite(cfg.snr_db)) {
    r.noise_power = r.signal_power / std::pow(10.0, cfg.snr_db / 10.0);
    Rng noise_rng(derive_seed(cfg.seed, {0x4015e}));
    for (auto& v : y) v += complex_gaussian(noise_rng, r.noise_power);
  }
  r.output = IqBuffer(std::move(y), x.sample_rate_hz(), x.center_freq_hz());
  return r;
}

inline IqBuffer apply_channel(const IqBuffer& x, const ChannelConfig& cfg) {
  return apply_channel_detailed(x, cfg).output;
}

}  // namespace cyclo
