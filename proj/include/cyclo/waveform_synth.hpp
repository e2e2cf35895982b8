#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "cyclo/detail/fft.hpp"
#include "cyclo/rng.hpp"
#include "cyclo/signal_model.hpp"

namespace cyclo {

// ---------------------------------------------------------------------------
// GSM normal burst, GMSK (BT = 0.3)
// ---------------------------------------------------------------------------

inline constexpr double kGsmSymbolRate = 1625000.0 / 6.0;
inline constexpr double kGsmBt = 0.3;

// Normal burst field layout, in bits from the start of the slot.
inline constexpr int kGsmTailBits = 3;
inline constexpr int kGsmDataBits = 57;
inline constexpr int kGsmTrainingBits = 26;
inline constexpr int kGsmTrainingOffset = kGsmTailBits + kGsmDataBits + 1;  // after first stealing flag
inline constexpr int kGsmBurstBits = 2 * (kGsmTailBits + kGsmDataBits + 1) + kGsmTrainingBits;  // 148

struct GsmSynthConfig {
  int num_slots = 1;
  int oversample = 4;
  int training_sequence_index = 0;
  std::uint64_t seed = 0;

  double sample_rate_hz() const { return oversample * kGsmSymbolRate; }
  /// Samples in the first n slots (floor of n * 156.25 * oversample).
  std::int64_t samples_for_slots(std::int64_t n) const { return n * 625 * oversample / 4; }
};

/// The eight normal-burst training sequence codes.
inline const std::array<std::uint8_t, kGsmTrainingBits>& gsm_training_sequence(int tsc) {
  static const std::array<std::array<std::uint8_t, kGsmTrainingBits>, 8> table = {{
      {0, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1},
      {0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1},
      {0, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1, 1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 1, 0},
      {0, 1, 0, 0, 0, 1, 1, 1, 1, 0, 1, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1, 0},
      {0, 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 1, 0, 1, 1},
      {0, 1, 0, 0, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 0, 1, 0},
      {1, 0, 1, 0, 0, 1, 1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 1, 0, 1, 0, 0, 1, 1, 1, 1, 1},
      {1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0},
  }};
  return table.at(static_cast<std::size_t>(tsc));
}

/// Bit-level schedule of a GSM slot sequence. Slot s occupies bits
/// [slot_start[s], slot_start[s+1]); slots alternate 157/156/156/156 bits so
/// that every four slots span exactly 625 bit periods.
struct GsmBitSchedule {
  std::vector<std::uint8_t> bits;
  std::vector<std::int64_t> slot_start;  // num_slots + 1 entries

  std::span<const std::uint8_t> training(std::size_t slot) const {
    return std::span(bits).subspan(static_cast<std::size_t>(slot_start[slot] + kGsmTrainingOffset),
                                   kGsmTrainingBits);
  }
};

inline void validate(const GsmSynthConfig& cfg) {
  if (cfg.num_slots < 1) throw ConfigError("GsmSynthConfig: num_slots must be >= 1");
  if (cfg.oversample < 2) throw ConfigError("GsmSynthConfig: oversample must be >= 2");
  if (cfg.training_sequence_index < 0 || cfg.training_sequence_index > 7)
    throw ConfigError("GsmSynthConfig: training_sequence_index must be in 0..7");
}

inline GsmBitSchedule gsm_bit_schedule(const GsmSynthConfig& cfg) {
  validate(cfg);
  GsmBitSchedule sched;
  const auto& tsc = gsm_training_sequence(cfg.training_sequence_index);
  Rng rng(derive_seed(cfg.seed, {0x65d}));
  for (std::int64_t s = 0; s <= cfg.num_slots; ++s) sched.slot_start.push_back((625 * s + 3) / 4);
  sched.bits.reserve(static_cast<std::size_t>(sched.slot_start.back()));
  for (int s = 0; s < cfg.num_slots; ++s) {
    const auto len = sched.slot_start[s + 1] - sched.slot_start[s];
    auto push_random = [&](int n) {
      for (int i = 0; i < n; ++i) sched.bits.push_back(static_cast<std::uint8_t>(random_bit(rng)));
    };
    sched.bits.insert(sched.bits.end(), kGsmTailBits, 0);
    push_random(kGsmDataBits + 1);  // data + stealing flag
    sched.bits.insert(sched.bits.end(), tsc.begin(), tsc.end());
    push_random(1 + kGsmDataBits);
    sched.bits.insert(sched.bits.end(), kGsmTailBits, 0);
    // guard period: 8 or 9 bits, modulated like data (continuous carrier)
    push_random(static_cast<int>(len) - kGsmBurstBits);
  }
  return sched;
}

namespace detail {

// Integrated GMSK frequency pulse G(t) for a symbol centred at t = 0, in
// units of symbol periods. G(-inf) = 0, G(+inf) = 1/2.
inline double gmsk_phase_pulse(double t, double bt = kGsmBt) {
  const double k = 2.0 * std::numbers::pi * bt / std::sqrt(std::log(2.0));
  auto q = [](double y) { return 0.5 * std::erfc(y / std::numbers::sqrt2); };
  auto pdf = [](double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi); };
  // antiderivative of Q
  auto big_q = [&](double y) { return y * q(y) - pdf(y); };
  return (big_q(k * (t - 0.5)) - big_q(k * (t + 0.5)) + k) / (2.0 * k);
}

}  // namespace detail

/// Continuous GMSK waveform of cfg.num_slots normal bursts.
inline IqBuffer synth_gsm(const GsmSynthConfig& cfg) {
  const GsmBitSchedule sched = gsm_bit_schedule(cfg);
  const int k = cfg.oversample;
  constexpr int kSpan = 5;   // symbols on each side where G is not yet settled
  constexpr int kLead = 8;   // random bits before slot 0 so the first samples are steady-state

  Rng rng(derive_seed(cfg.seed, {0x1ead}));
  std::vector<int> nrz;  // NRZ after differential encoding, symbol i = index - kLead
  const std::size_t total_bits = kLead + sched.bits.size() + kSpan + 2;
  nrz.reserve(total_bits);
  std::uint8_t prev = 0;
  auto push = [&](std::uint8_t b) {
    nrz.push_back(1 - 2 * static_cast<int>(b ^ prev));
    prev = b;
  };
  for (int i = 0; i < kLead; ++i) push(static_cast<std::uint8_t>(random_bit(rng)));
  for (auto b : sched.bits) push(b);
  while (nrz.size() < total_bits) push(static_cast<std::uint8_t>(random_bit(rng)));

  // pulse[d] = pi * G(d/k - 1/2) covers sample offsets d = n - i*k in [-kSpan*k, kSpan*k]
  std::vector<double> pulse(2 * kSpan * k + 1);
  for (int d = -kSpan * k; d <= kSpan * k; ++d)
    pulse[d + kSpan * k] = std::numbers::pi * detail::gmsk_phase_pulse(static_cast<double>(d) / k - 0.5);

  const std::int64_t n_out = cfg.samples_for_slots(cfg.num_slots);
  std::vector<cplx> out(static_cast<std::size_t>(n_out));
  const std::int64_t span = static_cast<std::int64_t>(kSpan) * k;
  double settled = 0.0;             // pi/2 * sum of fully integrated symbols
  std::int64_t next_symbol = -kLead;  // first symbol not yet settled
  for (std::int64_t n = 0; n < n_out; ++n) {
    while (n - next_symbol * k > span) {
      settled += 0.5 * std::numbers::pi * nrz[static_cast<std::size_t>(next_symbol + kLead)];
      ++next_symbol;
    }
    double phase = settled;
    for (std::int64_t i = next_symbol; n - i * k >= -span; ++i)
      phase += nrz[static_cast<std::size_t>(i + kLead)] * pulse[static_cast<std::size_t>(n - i * k + span)];
    out[static_cast<std::size_t>(n)] = std::polar(1.0, phase);
  }
  return IqBuffer(std::move(out), cfg.sample_rate_hz());
}

// ---------------------------------------------------------------------------
// LTE FDD downlink, normal CP, single antenna port
// ---------------------------------------------------------------------------

inline constexpr int kLteSymbolsPerSlot = 7;
inline constexpr int kLteSlotsPerFrame = 20;
inline constexpr int kLteSubcarrierSpacing = 15000;
inline constexpr int kLteSyncSubcarriers = 62;
inline constexpr int kLtePssRoot = 25;

struct LteSynthConfig {
  int num_slots = 1;
  int n_rb = 6;
  int fft_size = 128;
  double rs_power_boost_db = 2.5;
  std::uint64_t cell_seed = 0;
  std::uint64_t seed = 0;

  double sample_rate_hz() const { return static_cast<double>(fft_size) * kLteSubcarrierSpacing; }
  int subcarriers() const { return 12 * n_rb; }
  int cp_length(int symbol) const { return (symbol == 0 ? 10 : 9) * fft_size / 128; }
  int slot_samples() const { return kLteSymbolsPerSlot * fft_size + cp_length(0) + 6 * cp_length(1); }
  /// Offset of OFDM symbol l (start of its CP) within a slot.
  int symbol_offset(int symbol) const {
    int off = 0;
    for (int l = 0; l < symbol; ++l) off += cp_length(l) + fft_size;
    return off;
  }
};

inline void validate(const LteSynthConfig& cfg) {
  if (cfg.num_slots < 1) throw ConfigError("LteSynthConfig: num_slots must be >= 1");
  if (cfg.n_rb < 6) throw ConfigError("LteSynthConfig: n_rb must be >= 6 (synchronization signals need 62 subcarriers)");
  if (cfg.fft_size < 12 * cfg.n_rb)
    throw ConfigError("LteSynthConfig: fft_size must be >= 12 * n_rb");
  if (cfg.fft_size % 128 != 0)
    throw ConfigError("LteSynthConfig: fft_size must be a multiple of 128 for integer CP lengths");
  if (!std::isfinite(cfg.rs_power_boost_db)) throw ConfigError("LteSynthConfig: rs_power_boost_db must be finite");
}

enum class LteRe : std::uint8_t { data, rs, pss, sss, unused };

/// Resource grid for all slots: value and kind for each (slot, symbol,
/// subcarrier). Subcarrier k = 0..12*n_rb-1 runs from the lowest occupied
/// frequency upward; DC is not part of the grid.
struct LteResourceGrid {
  int slots = 0;
  int subcarriers = 0;
  std::vector<cplx> values;
  std::vector<LteRe> kinds;
  int cell_id = 0;

  std::size_t index(int slot, int symbol, int k) const {
    return (static_cast<std::size_t>(slot) * kLteSymbolsPerSlot + symbol) * subcarriers + k;
  }
  const cplx& at(int slot, int symbol, int k) const { return values[index(slot, symbol, k)]; }
  LteRe kind(int slot, int symbol, int k) const { return kinds[index(slot, symbol, k)]; }
};

inline std::vector<cplx> lte_pss(int root = kLtePssRoot) {
  std::vector<cplx> d(kLteSyncSubcarriers);
  for (int n = 0; n < kLteSyncSubcarriers; ++n) {
    const double m = n <= 30 ? static_cast<double>(n) * (n + 1) : static_cast<double>(n + 1) * (n + 2);
    d[static_cast<std::size_t>(n)] = std::polar(1.0, -std::numbers::pi * root * m / 63.0);
  }
  return d;
}

inline LteResourceGrid lte_resource_grid(const LteSynthConfig& cfg) {
  validate(cfg);
  LteResourceGrid g;
  g.slots = cfg.num_slots;
  g.subcarriers = cfg.subcarriers();
  const std::size_t total = static_cast<std::size_t>(g.slots) * kLteSymbolsPerSlot * g.subcarriers;
  g.values.assign(total, cplx{});
  g.kinds.assign(total, LteRe::data);

  const double qpsk = 1.0 / std::numbers::sqrt2;
  auto qpsk_symbol = [&](Rng& r) {
    return cplx(random_bit(r) ? -qpsk : qpsk, random_bit(r) ? -qpsk : qpsk);
  };

  // per-cell fixed content
  Rng cell_rng(derive_seed(cfg.cell_seed, {0xce11}));
  g.cell_id = static_cast<int>(cell_rng() % 504);
  const int v_shift = g.cell_id % 6;
  const double rs_amp = std::pow(10.0, cfg.rs_power_boost_db / 20.0);
  std::array<std::vector<cplx>, 2> rs_seq;
  for (auto& seq : rs_seq) {
    seq.resize(static_cast<std::size_t>(2 * cfg.n_rb));
    for (auto& v : seq) v = rs_amp * qpsk_symbol(cell_rng);
  }
  std::vector<cplx> sss(kLteSyncSubcarriers);
  for (auto& v : sss) v = random_bit(cell_rng) ? -1.0 : 1.0;
  const std::vector<cplx> pss = lte_pss();

  const int half = g.subcarriers / 2;
  // sync signal n = 0..61 sits at k = half - 31 + n; k = half - 31 .. half + 30
  const int sync_lo = half - 31;

  Rng data_rng(derive_seed(cfg.seed, {0xda7a}));
  for (int s = 0; s < g.slots; ++s) {
    const bool sync_slot = (s % kLteSlotsPerFrame) == 0 || (s % kLteSlotsPerFrame) == 10;
    for (int l = 0; l < kLteSymbolsPerSlot; ++l) {
      const bool rs_symbol = l == 0 || l == 4;
      const int v = l == 0 ? 0 : 3;
      const bool pss_symbol = sync_slot && l == 6;
      const bool sss_symbol = sync_slot && l == 5;
      for (int k = 0; k < g.subcarriers; ++k) {
        const std::size_t i = g.index(s, l, k);
        if (pss_symbol || sss_symbol) {
          const int n = k - sync_lo;
          if (n >= 0 && n < kLteSyncSubcarriers) {
            g.kinds[i] = pss_symbol ? LteRe::pss : LteRe::sss;
            g.values[i] = pss_symbol ? pss[static_cast<std::size_t>(n)] : sss[static_cast<std::size_t>(n)];
          } else {
            g.kinds[i] = LteRe::unused;
          }
          continue;
        }
        if (rs_symbol && (k % 6) == (v + v_shift) % 6) {
          g.kinds[i] = LteRe::rs;
          g.values[i] = rs_seq[l == 0 ? 0 : 1][static_cast<std::size_t>(k / 6)];
          continue;
        }
        g.values[i] = qpsk_symbol(data_rng);
      }
    }
  }
  return g;
}

/// OFDM-modulate a resource grid (unnormalized; CP prepended per symbol).
inline std::vector<cplx> lte_modulate(const LteSynthConfig& cfg, const LteResourceGrid& g) {
  const int n = cfg.fft_size;
  const int half = g.subcarriers / 2;
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(g.slots) * cfg.slot_samples());
  std::vector<cplx> bins(static_cast<std::size_t>(n)), body(static_cast<std::size_t>(n));
  for (int s = 0; s < g.slots; ++s) {
    for (int l = 0; l < kLteSymbolsPerSlot; ++l) {
      std::fill(bins.begin(), bins.end(), cplx{});
      for (int k = 0; k < g.subcarriers; ++k) {
        const int bin = k < half ? n - half + k : k - half + 1;
        bins[static_cast<std::size_t>(bin)] = g.at(s, l, k);
      }
      detail::dft(bins, body, detail::FftDirection::backward);
      const int cp = cfg.cp_length(l);
      out.insert(out.end(), body.end() - cp, body.end());
      out.insert(out.end(), body.begin(), body.end());
    }
  }
  return out;
}

namespace detail {
inline void normalize_power(std::vector<cplx>& x) {
  const double p = mean_power(x);
  if (p > 0.0) {
    const double s = 1.0 / std::sqrt(p);
    for (auto& v : x) v *= s;
  }
}
}  // namespace detail

inline IqBuffer synth_lte(const LteSynthConfig& cfg) {
  const LteResourceGrid g = lte_resource_grid(cfg);
  std::vector<cplx> x = lte_modulate(cfg, g);
  detail::normalize_power(x);
  return IqBuffer(std::move(x), cfg.sample_rate_hz());
}

// ---------------------------------------------------------------------------
// White Gaussian noise
// ---------------------------------------------------------------------------

inline IqBuffer synth_noise(std::int64_t m_r, double power, std::uint64_t seed, double sample_rate_hz = 1.0) {
  if (m_r < 1) throw ArgumentError("synth_noise: m_r must be >= 1");
  if (!(power > 0.0)) throw ArgumentError("synth_noise: power must be > 0");
  Rng rng(derive_seed(seed, {0x40153}));
  std::vector<cplx> x(static_cast<std::size_t>(m_r));
  const double scale = std::sqrt(power);
  for (auto& v : x) v = scale * complex_gaussian(rng);
  return IqBuffer(std::move(x), sample_rate_hz);
}

}  // namespace cyclo
