#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "cyclo/ccf_estimator.hpp"
#include "cyclo/channel_sim.hpp"
#include "cyclo/detector.hpp"
#include "cyclo/rng.hpp"
#include "cyclo/signal_model.hpp"
#include "cyclo/waveform_synth.hpp"

namespace cyclo {

namespace detail {

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. fn must
/// only write to slot i of caller-owned storage.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Native sample rate of each standard's generator at default settings.
inline double default_sample_rate(StandardId id) {
  return id == StandardId::GSM ? GsmSynthConfig{}.sample_rate_hz() : LteSynthConfig{}.sample_rate_hz();
}

/// Samples per slot at the generator's default rate (GSM: 625, LTE: 960).
inline std::int64_t default_slot_samples(StandardId id) {
  return id == StandardId::GSM ? GsmSynthConfig{}.samples_for_slots(1) : LteSynthConfig{}.slot_samples();
}

struct SweepConfig {
  StandardId standard = StandardId::GSM;
  std::vector<double> snr_db_list;
  std::vector<double> observation_times_s;
  std::vector<double> p_f_list = {1e-2};
  int n_trials = 1000;
  std::uint64_t master_seed = 0;
  ChannelConfig channel;  // template; seed, snr, timing offset and length are set per trial
  ThresholdMode threshold_mode = ThresholdMode::calibrated_closed_form;
  std::vector<StandardProfile> profiles = {profile_for(StandardId::GSM), profile_for(StandardId::LTE)};
};

inline void validate(const SweepConfig& cfg) {
  if (cfg.n_trials < 1) throw ConfigError("SweepConfig: n_trials must be >= 1");
  if (cfg.snr_db_list.empty() || cfg.observation_times_s.empty() || cfg.p_f_list.empty())
    throw ConfigError("SweepConfig: snr, observation time and p_f lists must be nonempty");
  const double min_t = 2.0 * profile_for(cfg.standard).slot_seconds();
  for (double t : cfg.observation_times_s)
    if (!(t > min_t)) throw ConfigError("SweepConfig: observation times must exceed two slots");
  for (double p : cfg.p_f_list)
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("SweepConfig: p_f values must lie in (0, 1)");
  for (double s : cfg.snr_db_list)
    if (std::isnan(s)) throw ConfigError("SweepConfig: snr is NaN");
}

struct SweepCell {
  double snr_db = 0.0;
  double obs_time_s = 0.0;
  double p_f = 0.0;
  std::int64_t m_r = 0;
  int n_trials = 0;
  int n_correct = 0;

  double pd() const { return n_trials > 0 ? static_cast<double>(n_correct) / n_trials : 0.0; }
  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepResult {
  StandardId standard = StandardId::GSM;
  std::vector<SweepCell> cells;  // ordered by (snr, T, p_f)

  const SweepCell* find(double snr_db, double obs_time_s, double p_f) const {
    for (const auto& c : cells)
      if (c.snr_db == snr_db && std::abs(c.obs_time_s - obs_time_s) < 1e-12 && c.p_f == p_f) return &c;
    return nullptr;
  }
};

/// One received record. Seeds depend only on (trial_seed), so any trial can
/// be regenerated in isolation.
inline IqBuffer simulate_trial(StandardId standard, std::int64_t m_r, double snr_db, const ChannelConfig& channel,
                               std::uint64_t trial_seed) {
  const std::int64_t slot = default_slot_samples(standard);
  const std::int64_t need = m_r + slot + static_cast<std::int64_t>(channel.num_taps) * channel.tap_spacing;
  const int slots = static_cast<int>((need + slot - 1) / slot) + 1;
  const IqBuffer tx = standard == StandardId::GSM
                          ? synth_gsm({.num_slots = slots, .oversample = 4, .training_sequence_index = 0,
                                       .seed = derive_seed(trial_seed, {1})})
                          : synth_lte({.num_slots = slots, .seed = derive_seed(trial_seed, {1})});
  ChannelConfig ch = channel;
  ch.snr_db = snr_db;
  ch.timing_offset_mode = TimingOffsetMode::uniform_first_slot;
  ch.slot_samples = slot;
  ch.output_samples = m_r;
  ch.seed = derive_seed(trial_seed, {2});
  return apply_channel(tx, ch);
}

inline std::int64_t samples_for_time(StandardId standard, double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * default_sample_rate(standard)));
}

/// Pd = P(label = standard | standard) per (snr, T, p_f) cell. Trials for the
/// same (snr, T) are shared across p_f values (common random numbers), so
/// Pd is monotone in p_f by construction.
inline SweepResult run_detection_sweep(const SweepConfig& cfg) {
  validate(cfg);
  SweepResult res;
  res.standard = cfg.standard;
  const Label want = label_for(cfg.standard);
  const std::size_t n_pf = cfg.p_f_list.size();

  for (std::size_t si = 0; si < cfg.snr_db_list.size(); ++si) {
    for (std::size_t ti = 0; ti < cfg.observation_times_s.size(); ++ti) {
      const double snr = cfg.snr_db_list[si];
      const double t_obs = cfg.observation_times_s[ti];
      const std::int64_t m_r = samples_for_time(cfg.standard, t_obs);
      std::vector<std::uint8_t> hits(static_cast<std::size_t>(cfg.n_trials) * n_pf, 0);
      detail::parallel_for(static_cast<std::size_t>(cfg.n_trials), [&](std::size_t trial) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, {si, ti, trial});
        const IqBuffer rx = simulate_trial(cfg.standard, m_r, snr, cfg.channel, seed);
        for (std::size_t pi = 0; pi < n_pf; ++pi) {
          DetectorConfig det;
          det.p_f = cfg.p_f_list[pi];
          det.threshold_mode = cfg.threshold_mode;
          det.profiles = cfg.profiles;
          hits[trial * n_pf + pi] = classify(rx, det).label == want ? 1 : 0;
        }
      });
      for (std::size_t pi = 0; pi < n_pf; ++pi) {
        SweepCell c{snr, t_obs, cfg.p_f_list[pi], m_r, cfg.n_trials, 0};
        for (int trial = 0; trial < cfg.n_trials; ++trial) c.n_correct += hits[static_cast<std::size_t>(trial) * n_pf + pi];
        res.cells.push_back(c);
      }
    }
  }
  return res;
}

struct FalseAlarmConfig {
  double noise_power = 1.0;
  std::int64_t m_r = 10000;
  double p_f = 1e-2;
  int n_trials = 10000;
  ThresholdMode mode = ThresholdMode::calibrated_closed_form;
  std::vector<StandardProfile> profiles = {profile_for(StandardId::GSM), profile_for(StandardId::LTE)};
  double sample_rate_hz = 1.92e6;
  std::uint64_t seed = 0;
};

struct FalseAlarmResult {
  StandardId id = StandardId::GSM;
  int n_trials = 0;
  int n_detected = 0;
  std::int64_t window_samples = 0;
  double rate() const { return n_trials > 0 ? static_cast<double>(n_detected) / n_trials : 0.0; }
};

/// Fraction of noise-only records for which each profile reports a detection.
inline std::vector<FalseAlarmResult> run_false_alarm(const FalseAlarmConfig& cfg) {
  if (cfg.n_trials < 1) throw ConfigError("run_false_alarm: n_trials must be >= 1");
  DetectorConfig det;
  det.p_f = cfg.p_f;
  det.threshold_mode = cfg.mode;
  det.profiles = cfg.profiles;
  validate(det);
  const std::size_t n_prof = cfg.profiles.size();
  std::vector<std::uint8_t> hits(static_cast<std::size_t>(cfg.n_trials) * n_prof, 0);
  std::vector<std::int64_t> windows(n_prof, 0);
  detail::parallel_for(static_cast<std::size_t>(cfg.n_trials), [&](std::size_t trial) {
    const IqBuffer noise =
        synth_noise(cfg.m_r, cfg.noise_power, derive_seed(cfg.seed, {0xfa, trial}), cfg.sample_rate_hz);
    const DecisionReport rep = classify(noise, det);
    for (std::size_t p = 0; p < n_prof; ++p) {
      hits[trial * n_prof + p] = rep.profiles[p].detected ? 1 : 0;
      if (trial == 0) windows[p] = rep.profiles[p].window_samples;
    }
  });
  std::vector<FalseAlarmResult> out;
  for (std::size_t p = 0; p < n_prof; ++p) {
    FalseAlarmResult r{cfg.profiles[p].id, cfg.n_trials, 0, windows[p]};
    for (int t = 0; t < cfg.n_trials; ++t) r.n_detected += hits[static_cast<std::size_t>(t) * n_prof + p];
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Figure data
// ---------------------------------------------------------------------------

enum class Figure { fig3, fig4, fig7, fig8, fig9 };

inline Figure parse_figure(std::string_view s) {
  if (s == "fig3") return Figure::fig3;
  if (s == "fig4") return Figure::fig4;
  if (s == "fig7") return Figure::fig7;
  if (s == "fig8") return Figure::fig8;
  if (s == "fig9") return Figure::fig9;
  throw ArgumentError("unknown figure '" + std::string(s) + "' (expected fig3, fig4, fig7, fig8 or fig9)");
}

struct FigureOptions {
  int n_trials = 1000;
  std::uint64_t seed = 0;
  std::vector<double> snr_db_list = [] {
    std::vector<double> v;
    for (int s = -20; s <= 10; ++s) v.push_back(s);
    return v;
  }();
  ThresholdMode threshold_mode = ThresholdMode::calibrated_closed_form;
};

/// CCF spectrum of one 1000-slot record through the default channel at 20 dB.
inline CcfSpectrum reference_spectrum(StandardId standard, std::uint64_t seed, double max_alpha_hz = 20000.0) {
  const IqBuffer tx = standard == StandardId::GSM
                          ? synth_gsm({.num_slots = 1000, .oversample = 4, .seed = derive_seed(seed, {3})})
                          : synth_lte({.num_slots = 1000, .seed = derive_seed(seed, {3})});
  ChannelConfig ch;
  ch.snr_db = 20.0;
  ch.seed = derive_seed(seed, {4});
  return ccf_spectrum(apply_channel(tx, ch), 0, max_alpha_hz);
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "snr_db,obs_time_ms,pd,n_trials\n";
  char line[128];
  for (const auto& c : r.cells) {
    std::snprintf(line, sizeof line, "%.6g,%.6g,%.6g,%d\n", c.snr_db, c.obs_time_s * 1e3, c.pd(), c.n_trials);
    os << line;
  }
}

inline void write_pf_csv(std::ostream& os, const std::vector<SweepResult>& results) {
  os << "snr_db,p_f,standard,pd,n_trials\n";
  char line[128];
  for (const auto& r : results)
    for (const auto& c : r.cells) {
      std::snprintf(line, sizeof line, "%.6g,%.6g,%s,%.6g,%d\n", c.snr_db, c.p_f,
                    std::string(to_string(r.standard)).c_str(), c.pd(), c.n_trials);
      os << line;
    }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

/// Writes the CSV backing one figure.
inline void emit_figure_data(Figure which, const std::string& out_path, const FigureOptions& opt = {}) {
  std::ofstream os = open_output(out_path);
  switch (which) {
    case Figure::fig3:
    case Figure::fig4:
      write_csv(os, reference_spectrum(which == Figure::fig3 ? StandardId::GSM : StandardId::LTE, opt.seed));
      break;
    case Figure::fig7:
    case Figure::fig8: {
      SweepConfig cfg;
      cfg.standard = which == Figure::fig7 ? StandardId::GSM : StandardId::LTE;
      cfg.snr_db_list = opt.snr_db_list;
      cfg.observation_times_s = {10e-3, 50e-3};
      cfg.p_f_list = {1e-2};
      cfg.n_trials = opt.n_trials;
      cfg.master_seed = opt.seed;
      cfg.threshold_mode = opt.threshold_mode;
      write_sweep_csv(os, run_detection_sweep(cfg));
      break;
    }
    case Figure::fig9: {
      std::vector<SweepResult> results;
      for (StandardId id : {StandardId::GSM, StandardId::LTE}) {
        SweepConfig cfg;
        cfg.standard = id;
        cfg.snr_db_list = opt.snr_db_list;
        cfg.observation_times_s = {10e-3};
        cfg.p_f_list = {1e-1, 1e-2, 1e-3};
        cfg.n_trials = opt.n_trials;
        cfg.master_seed = opt.seed;
        cfg.threshold_mode = opt.threshold_mode;
        results.push_back(run_detection_sweep(cfg));
      }
      write_pf_csv(os, results);
      break;
    }
  }
  os.flush();
  if (!os) throw IoError("write failed for '" + out_path + "'");
}

}  // namespace cyclo
