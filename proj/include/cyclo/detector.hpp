#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclo/ccf_estimator.hpp"
#include "cyclo/rng.hpp"
#include "cyclo/signal_model.hpp"
#include "cyclo/waveform_synth.hpp"

namespace cyclo {

enum class ThresholdMode {
  paper_eq5,               // Gamma = sqrt(-sigma_r^2 ln P_F), no record-length dependence
  calibrated_closed_form,  // Rayleigh law of |C(alpha,0)| under white noise
  empirical_null,          // (1 - P_F) quantile over simulated noise-only records
};

inline std::string_view to_string(ThresholdMode m) {
  switch (m) {
    case ThresholdMode::paper_eq5: return "paper_eq5";
    case ThresholdMode::calibrated_closed_form: return "calibrated";
    case ThresholdMode::empirical_null: return "empirical";
  }
  return "?";
}

inline ThresholdMode parse_threshold_mode(std::string_view s) {
  if (s == "paper_eq5" || s == "eq5") return ThresholdMode::paper_eq5;
  if (s == "calibrated" || s == "calibrated_closed_form") return ThresholdMode::calibrated_closed_form;
  if (s == "empirical" || s == "empirical_null") return ThresholdMode::empirical_null;
  throw ArgumentError("unknown threshold mode '" + std::string(s) + "'");
}

// Normalized cyclic frequency used for null calibration when the caller
// does not name one (the LTE fundamental at its default 1.92 MHz rate).
inline constexpr double kDefaultNullCf = 2000.0 / 1.92e6;
inline constexpr std::uint64_t kNullSeed = 0x5eed0f0a11ULL;

struct DetectorConfig {
  double p_f = 1e-2;
  ThresholdMode threshold_mode = ThresholdMode::calibrated_closed_form;
  std::vector<StandardProfile> profiles = {profile_for(StandardId::GSM), profile_for(StandardId::LTE)};
  int empirical_null_trials = 10000;
  // Experimental: statistic = sum of |C(k alpha, 0)| over k = 1..harmonics.
  // Values above 1 need an empirical_null threshold.
  int harmonics = 1;
  std::uint64_t null_seed = kNullSeed;
};

inline void validate(const DetectorConfig& cfg) {
  if (!(cfg.p_f > 0.0 && cfg.p_f < 1.0)) throw ConfigError("DetectorConfig: p_f must lie in (0, 1)");
  if (cfg.profiles.empty()) throw ConfigError("DetectorConfig: profiles must not be empty");
  if (cfg.empirical_null_trials < 1) throw ConfigError("DetectorConfig: empirical_null_trials must be >= 1");
  if (cfg.harmonics < 1) throw ConfigError("DetectorConfig: harmonics must be >= 1");
  if (cfg.harmonics > 1 && cfg.threshold_mode != ThresholdMode::empirical_null)
    throw ConfigError("DetectorConfig: harmonic combining requires the empirical_null threshold");
}

/// Mean power (1/M_r) sum |r(m)|^2; the received signal is taken as zero mean.
inline double estimate_variance(const IqBuffer& r) {
  if (r.empty()) throw ArgumentError("estimate_variance: empty buffer");
  return mean_power(r.samples());
}

namespace detail {

inline double combined_statistic(const IqBuffer& r, double alpha_hz, int harmonics) {
  double stat = 0.0;
  for (int k = 1; k <= harmonics; ++k) stat += estimate_ccf(r, k * alpha_hz, 0).magnitude();
  return stat;
}

/// Sorted null statistics for unit-power white noise of length m_r. The
/// cyclic frequency is snapped to the record's natural grid (a whole number
/// of cycles), matching the whole-period windows classify evaluates.
inline std::vector<double> null_statistics(std::int64_t m_r, double alpha_cycles_per_sample, int trials, int harmonics,
                                           std::uint64_t seed) {
  const double cycles = std::max(1.0, std::round(alpha_cycles_per_sample * static_cast<double>(m_r)));
  alpha_cycles_per_sample = cycles / static_cast<double>(m_r);
  std::vector<double> stats(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const IqBuffer noise = synth_noise(m_r, 1.0, derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    stats[static_cast<std::size_t>(t)] = combined_statistic(noise, alpha_cycles_per_sample, harmonics);
  }
  std::sort(stats.begin(), stats.end());
  return stats;
}

/// Order statistic with exactly floor(p_f * n) null samples strictly above it.
inline double upper_quantile(const std::vector<double>& sorted, double p_f) {
  const auto n = static_cast<std::int64_t>(sorted.size());
  auto above = static_cast<std::int64_t>(std::floor(p_f * static_cast<double>(n)));
  above = std::clamp<std::int64_t>(above, 0, n - 1);
  return sorted[static_cast<std::size_t>(n - 1 - above)];
}

// Unit-power null quantile, memoized: thresholds scale exactly with sigma_r^2.
inline double unit_null_quantile(std::int64_t m_r, double alpha_cycles_per_sample, double p_f, int trials,
                                 int harmonics, std::uint64_t seed) {
  using Key = std::tuple<std::int64_t, double, int, int, std::uint64_t>;
  static std::mutex mu;
  static std::map<Key, std::vector<double>> cache;
  const Key key{m_r, alpha_cycles_per_sample, trials, harmonics, seed};
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return upper_quantile(it->second, p_f);
  }
  auto stats = null_statistics(m_r, alpha_cycles_per_sample, trials, harmonics, seed);
  std::lock_guard lock(mu);
  auto [it, inserted] = cache.emplace(key, std::move(stats));
  return upper_quantile(it->second, p_f);
}

}  // namespace detail

/// Decision threshold Gamma for a statistic computed from m_r samples with
/// received power sigma_r_sq.
inline double threshold(const DetectorConfig& cfg, double sigma_r_sq, std::int64_t m_r,
                        double alpha_cycles_per_sample = kDefaultNullCf) {
  validate(cfg);
  if (!(sigma_r_sq > 0.0)) throw ArgumentError("threshold: sigma_r_sq must be > 0");
  if (m_r < 1) throw ArgumentError("threshold: m_r must be >= 1");
  const double log_pf = std::log(cfg.p_f);
  switch (cfg.threshold_mode) {
    case ThresholdMode::paper_eq5:
      return std::sqrt(-sigma_r_sq * log_pf);
    case ThresholdMode::calibrated_closed_form:
      // Re/Im of C(alpha,0) each have variance sigma^4 / (2 M_r) under noise.
      return sigma_r_sq * std::sqrt(-log_pf / static_cast<double>(m_r));
    case ThresholdMode::empirical_null:
      return sigma_r_sq * detail::unit_null_quantile(m_r, alpha_cycles_per_sample, cfg.p_f,
                                                     cfg.empirical_null_trials, cfg.harmonics, cfg.null_seed);
  }
  throw ConfigError("threshold: unknown mode");
}

enum class Label { GSM, LTE, unknown };

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::GSM: return "GSM";
    case Label::LTE: return "LTE";
    case Label::unknown: return "unknown";
  }
  return "unknown";
}

inline Label label_for(StandardId id) { return id == StandardId::GSM ? Label::GSM : Label::LTE; }

struct ProfileDecision {
  StandardId id = StandardId::GSM;
  double alpha_hz = 0.0;
  double statistic = 0.0;  // |C(alpha_i, 0)| (or harmonic sum)
  double threshold = 0.0;
  bool detected = false;
  std::int64_t window_samples = 0;  // samples entering the estimate

  double ratio() const { return threshold > 0.0 ? statistic / threshold : INFINITY; }
};

struct DecisionReport {
  std::vector<ProfileDecision> profiles;
  Label label = Label::unknown;
  double sigma_r_sq = 0.0;

  const ProfileDecision* find(StandardId id) const {
    for (const auto& p : profiles)
      if (p.id == id) return &p;
    return nullptr;
  }
  bool any_detected() const { return label != Label::unknown; }
};

/// Samples in the longest prefix of an m_r-sample record that spans a whole
/// number of periods of the cyclic frequency. Over such a window the mean
/// power does not leak into C(alpha, 0).
inline std::int64_t whole_period_window(std::int64_t m_r, double alpha_hz, double sample_rate_hz) {
  const double period = sample_rate_hz / alpha_hz;  // samples per cyclic period
  const auto periods = static_cast<std::int64_t>(std::floor(static_cast<double>(m_r) / period + 1e-9));
  if (periods < 1) return m_r;
  return std::min(m_r, static_cast<std::int64_t>(std::llround(static_cast<double>(periods) * period)));
}

inline std::int64_t minimum_record_samples(const DetectorConfig& cfg, double sample_rate_hz) {
  double longest = 0.0;
  for (const auto& p : cfg.profiles) longest = std::max(longest, p.slot_seconds());
  return static_cast<std::int64_t>(std::ceil(2.0 * longest * sample_rate_hz - 1e-9));
}

inline DecisionReport classify(const IqBuffer& r, const DetectorConfig& cfg) {
  validate(cfg);
  const std::int64_t need = minimum_record_samples(cfg, r.sample_rate_hz());
  if (static_cast<std::int64_t>(r.size()) < need)
    throw ArgumentError("classify: buffer too short; need at least " + std::to_string(need) +
                        " samples (two slots of the longest profile)");

  DecisionReport rep;
  rep.sigma_r_sq = estimate_variance(r);
  const auto m_r = static_cast<std::int64_t>(r.size());
  double best_ratio = 0.0;
  for (const auto& prof : cfg.profiles) {
    ProfileDecision d;
    d.id = prof.id;
    d.alpha_hz = prof.alpha_hz();
    d.window_samples = whole_period_window(m_r, d.alpha_hz, r.sample_rate_hz());
    const IqBuffer window =
        d.window_samples == m_r
            ? r
            : IqBuffer(std::vector<cplx>(r.samples().begin(), r.samples().begin() + d.window_samples),
                       r.sample_rate_hz(), r.center_freq_hz());
    d.statistic = detail::combined_statistic(window, d.alpha_hz, cfg.harmonics);
    d.threshold = rep.sigma_r_sq > 0.0
                      ? threshold(cfg, rep.sigma_r_sq, d.window_samples, d.alpha_hz * r.sample_period_s())
                      : 0.0;
    d.detected = d.statistic > d.threshold;
    if (d.detected && d.ratio() > best_ratio) {
      best_ratio = d.ratio();
      rep.label = label_for(prof.id);
    }
    rep.profiles.push_back(d);
  }
  return rep;
}

/// Single-line JSON record.
inline std::string to_json_line(const DecisionReport& rep) {
  nlohmann::json j;
  j["label"] = std::string(to_string(rep.label));
  j["sigma_r_sq"] = rep.sigma_r_sq;
  j["profiles"] = nlohmann::json::array();
  for (const auto& p : rep.profiles) {
    j["profiles"].push_back({{"profile", std::string(to_string(p.id))},
                             {"alpha_hz", p.alpha_hz},
                             {"statistic", p.statistic},
                             {"threshold", p.threshold},
                             {"detected", p.detected},
                             {"window_samples", p.window_samples}});
  }
  return j.dump();
}

/// CSV: `profile,statistic,threshold,detected,label`, one row per profile.
inline void write_csv(std::ostream& os, const DecisionReport& rep) {
  os << "profile,statistic,threshold,detected,label\n";
  char line[160];
  for (const auto& p : rep.profiles) {
    std::snprintf(line, sizeof line, "%s,%.12g,%.12g,%s,%s\n", std::string(to_string(p.id)).c_str(), p.statistic,
                  p.threshold, p.detected ? "true" : "false", std::string(to_string(rep.label)).c_str());
    os << line;
  }
}

}  // namespace cyclo
