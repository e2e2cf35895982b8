#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cyclo {

using cplx = std::complex<double>;

// Error categories. Each maps to one failure class in the CLI exit-code contract.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnsupportedFormatError : FormatError {
  using FormatError::FormatError;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact rational number with a positive denominator, always in lowest terms.
class Rational {
 public:
  constexpr Rational(std::int64_t num = 0, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw ArgumentError("Rational: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  constexpr double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  constexpr Rational reciprocal() const { return Rational(den_, num_); }

  friend constexpr Rational operator*(Rational a, Rational b) {
    // cross-reduce first to keep intermediates small
    const std::int64_t g1 = std::gcd(a.num_, b.den_);
    const std::int64_t g2 = std::gcd(b.num_, a.den_);
    return Rational((a.num_ / (g1 ? g1 : 1)) * (b.num_ / (g2 ? g2 : 1)),
                    (a.den_ / (g2 ? g2 : 1)) * (b.den_ / (g1 ? g1 : 1)));
  }
  friend constexpr Rational operator*(std::int64_t k, Rational a) { return Rational(k) * a; }
  friend constexpr bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_;
  std::int64_t den_;
};

enum class StandardId { GSM, LTE };

inline std::string_view to_string(StandardId id) { return id == StandardId::GSM ? "GSM" : "LTE"; }

inline StandardId parse_standard(std::string_view s) {
  if (s == "GSM" || s == "gsm") return StandardId::GSM;
  if (s == "LTE" || s == "lte") return StandardId::LTE;
  throw ArgumentError("unknown standard '" + std::string(s) + "' (expected gsm or lte)");
}

/// Per-standard pilot periodicity. Values are exact rationals; conversion to
/// double happens only where a DSP kernel needs it.
struct StandardProfile {
  StandardId id;
  Rational slot_duration_s;
  Rational fundamental_cf_hz;
  std::optional<Rational> secondary_cf_hz;

  double slot_seconds() const { return slot_duration_s.value(); }
  double alpha_hz() const { return fundamental_cf_hz.value(); }
  /// Cyclic frequency of harmonic k, exact.
  Rational harmonic(std::int64_t k) const { return k * fundamental_cf_hz; }

  friend bool operator==(const StandardProfile&, const StandardProfile&) = default;
};

// 3 GSM slots last 15/26 ms: 156.25 symbols at 1625000/6 symbols/s.
inline constexpr Rational kGsmSlotDuration{15, 26000};
inline constexpr Rational kLteSlotDuration{1, 2000};
inline constexpr Rational kLteSyncCf{200, 1};

// Rounded values quoted in the literature (577 us slot, 1733 Hz line). Kept
// for comparison runs only; the detector uses the exact profile by default.
inline constexpr double kGsmRoundedSlotSeconds = 577e-6;
inline constexpr double kGsmRoundedCfHz = 1733.0;

inline StandardProfile profile_for(StandardId id) {
  switch (id) {
    case StandardId::GSM:
      return {id, kGsmSlotDuration, kGsmSlotDuration.reciprocal(), std::nullopt};
    case StandardId::LTE:
      return {id, kLteSlotDuration, kLteSlotDuration.reciprocal(), kLteSyncCf};
  }
  throw ArgumentError("profile_for: unknown standard");
}

/// Complex baseband record r(m), m = 0..M_r-1. Sampling period is always
/// derived from the rate.
class IqBuffer {
 public:
  IqBuffer() = default;
  IqBuffer(std::vector<cplx> samples, double sample_rate_hz,
           std::optional<double> center_freq_hz = std::nullopt)
      : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), center_freq_hz_(center_freq_hz) {
    if (!(sample_rate_hz_ > 0.0)) throw ArgumentError("IqBuffer: sample_rate_hz must be > 0");
  }

  const std::vector<cplx>& samples() const { return samples_; }
  std::vector<cplx>& samples() { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const cplx& operator[](std::size_t i) const { return samples_[i]; }

  double sample_rate_hz() const { return sample_rate_hz_; }
  double sample_period_s() const { return 1.0 / sample_rate_hz_; }
  double duration_s() const { return static_cast<double>(samples_.size()) / sample_rate_hz_; }
  const std::optional<double>& center_freq_hz() const { return center_freq_hz_; }

  friend bool operator==(const IqBuffer&, const IqBuffer&) = default;

 private:
  std::vector<cplx> samples_;
  double sample_rate_hz_ = 1.0;
  std::optional<double> center_freq_hz_;
};

/// One cyclic correlation value C(alpha, tau) estimated from m_r samples.
struct CcfEstimate {
  double alpha_hz = 0.0;
  std::int64_t tau_samples = 0;
  cplx value{};
  std::int64_t m_r = 0;

  double magnitude() const { return std::abs(value); }
};

inline double mean_power(const std::vector<cplx>& x) {
  if (x.empty()) return 0.0;
  long double acc = 0.0L;
  for (const auto& v : x) acc += std::norm(v);
  return static_cast<double>(acc / static_cast<long double>(x.size()));
}

}  // namespace cyclo
