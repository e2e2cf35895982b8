// Command-line front end. Exit codes: 0 success, 1 classify found no
// standard, 2 usage error, 3 I/O or format error.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cyclo/cyclo.hpp"

namespace {

enum Exit { kOk = 0, kNegative = 1, kUsage = 2, kIo = 3 };

using namespace cyclo;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ArgumentError("not a number: '" + s + "'");
  return v;
}

/// "a:step:b" (inclusive) or a comma-separated list.
std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw ArgumentError("range must be start:step:stop, got '" + s + "'");
    const double a = to_double(parts[0]), step = to_double(parts[1]), b = to_double(parts[2]);
    if (!(step > 0.0) || b < a) throw ArgumentError("bad range '" + s + "'");
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  for (const auto& p : split(s, ',')) out.push_back(to_double(p));
  if (out.empty()) throw ArgumentError("empty list");
  return out;
}

std::vector<StandardProfile> parse_profiles(const std::string& s) {
  std::vector<StandardProfile> out;
  for (const auto& p : split(s, ',')) out.push_back(profile_for(parse_standard(p)));
  if (out.empty()) throw ArgumentError("--profiles must name at least one standard");
  return out;
}

// Standard LTE FFT sizes per bandwidth; other n_rb get the next multiple of 128.
int default_fft_size(int n_rb) {
  switch (n_rb) {
    case 6: return 128;
    case 15: return 256;
    case 25: return 512;
    case 50: return 1024;
    case 75: return 1536;
    case 100: return 2048;
    default: return (12 * n_rb / 128 + 1) * 128;
  }
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os = open_output(path);
  fn(os);
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cyclostationary GSM/LTE signal identification"};
  app.require_subcommand(1);

  // synth-gsm
  auto* gsm = app.add_subcommand("synth-gsm", "Generate a GMSK normal-burst GSM waveform");
  GsmSynthConfig gsm_cfg;
  std::string gsm_out;
  std::uint64_t gsm_seed = 0;
  gsm->add_option("--slots", gsm_cfg.num_slots, "Number of time slots")->required();
  gsm->add_option("--oversample", gsm_cfg.oversample, "Samples per symbol")->capture_default_str();
  gsm->add_option("--tsc", gsm_cfg.training_sequence_index, "Training sequence code 0..7")->capture_default_str();
  gsm->add_option("--seed", gsm_seed, "Random seed")->required();
  gsm->add_option("--out", gsm_out, "Output .iq file")->required();

  // synth-lte
  auto* lte = app.add_subcommand("synth-lte", "Generate an LTE FDD downlink waveform (normal CP)");
  LteSynthConfig lte_cfg;
  std::string lte_out;
  std::uint64_t lte_seed = 0;
  std::optional<std::uint64_t> lte_cell_seed;
  std::optional<int> lte_fft;
  lte->add_option("--slots", lte_cfg.num_slots, "Number of 0.5 ms slots")->required();
  lte->add_option("--rb", lte_cfg.n_rb, "Resource blocks")->capture_default_str();
  lte->add_option("--fft-size", lte_fft, "FFT size (default: standard size for --rb)");
  lte->add_option("--rs-boost-db", lte_cfg.rs_power_boost_db, "Reference signal power boost")->capture_default_str();
  lte->add_option("--cell-seed", lte_cell_seed, "Seed for cell-fixed content (default: --seed)");
  lte->add_option("--seed", lte_seed, "Random seed")->required();
  lte->add_option("--out", lte_out, "Output .iq file")->required();

  // channel
  auto* chan = app.add_subcommand("channel", "Apply multipath fading, AWGN, timing and frequency offset");
  ChannelConfig ch_cfg;
  std::string ch_in, ch_out, ch_offset = "none", ch_snr_ref = "post";
  std::string ch_snr = "inf";
  std::optional<std::int64_t> ch_slot_samples;
  std::optional<std::string> ch_standard;
  chan->add_option("--in", ch_in, "Input .iq file")->required();
  chan->add_option("--snr-db", ch_snr, "SNR in dB, or 'inf' for no noise")->capture_default_str();
  chan->add_option("--taps", ch_cfg.num_taps, "Number of taps")->capture_default_str();
  chan->add_option("--decay", ch_cfg.pdp_decay, "Power delay profile decay (exp(-p/decay))")->capture_default_str();
  chan->add_option("--tap-spacing", ch_cfg.tap_spacing, "Samples between taps")->capture_default_str();
  chan->add_option("--timing-offset", ch_offset, "none | uniform")->capture_default_str();
  chan->add_option("--slot-samples", ch_slot_samples, "Slot length for uniform timing offset");
  chan->add_option("--standard", ch_standard, "Derive slot length from gsm | lte at the file's rate");
  chan->add_option("--cfo-hz", ch_cfg.cfo_hz, "Carrier frequency offset")->capture_default_str();
  chan->add_option("--snr-ref", ch_snr_ref, "SNR reference: post | pre fading")->capture_default_str();
  chan->add_option("--seed", ch_cfg.seed, "Random seed")->required();
  chan->add_option("--out", ch_out, "Output .iq file")->required();

  // ccf-spectrum
  auto* spec = app.add_subcommand("ccf-spectrum", "CCF magnitude on the natural cyclic-frequency grid (CSV)");
  std::string sp_in, sp_out = "-";
  std::int64_t sp_tau = 0;
  double sp_max = 20000.0;
  spec->add_option("--in", sp_in, "Input .iq file")->required();
  spec->add_option("--tau", sp_tau, "Delay in samples")->capture_default_str();
  spec->add_option("--max-alpha", sp_max, "Largest cyclic frequency in Hz")->capture_default_str();
  spec->add_option("--out", sp_out, "Output CSV ('-' for stdout)")->capture_default_str();

  // classify
  auto* cls = app.add_subcommand("classify", "Identify GSM/LTE by CFAR test on |C(alpha_i, 0)|");
  std::string cl_in, cl_mode = "calibrated", cl_profiles = "gsm,lte", cl_format = "csv";
  DetectorConfig det_cfg;
  cls->add_option("--in", cl_in, "Input .iq file")->required();
  cls->add_option("--pf", det_cfg.p_f, "False alarm probability")->capture_default_str();
  cls->add_option("--mode", cl_mode, "calibrated | empirical | paper_eq5")->capture_default_str();
  cls->add_option("--profiles", cl_profiles, "Comma-separated standards")->capture_default_str();
  cls->add_option("--null-trials", det_cfg.empirical_null_trials, "Trials for the empirical threshold")
      ->capture_default_str();
  cls->add_option("--harmonics", det_cfg.harmonics, "Harmonics combined into the statistic (empirical mode)")
      ->capture_default_str();
  cls->add_option("--format", cl_format, "csv | json")->capture_default_str();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Monte Carlo Pd versus SNR sweep (CSV)");
  std::string sw_standard, sw_snr, sw_obs = "10,50", sw_pf = "0.01", sw_out = "-", sw_mode = "calibrated";
  int sw_trials = 1000;
  std::uint64_t sw_seed = 0;
  sw->add_option("--standard", sw_standard, "gsm | lte")->required();
  sw->add_option("--snr", sw_snr, "SNR list (a:step:b or comma list)")->required();
  sw->add_option("--obs-ms", sw_obs, "Observation times in ms")->capture_default_str();
  sw->add_option("--pf", sw_pf, "False alarm probabilities")->capture_default_str();
  sw->add_option("--trials", sw_trials, "Trials per cell")->capture_default_str();
  sw->add_option("--mode", sw_mode, "Threshold mode")->capture_default_str();
  sw->add_option("--seed", sw_seed, "Master seed")->required();
  sw->add_option("--out", sw_out, "Output CSV ('-' for stdout)")->capture_default_str();

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Empirical CFAR threshold for unit-power noise");
  std::int64_t cal_mr = 0;
  double cal_pf = 0.01, cal_alpha = kDefaultNullCf, cal_sigma = 1.0;
  int cal_trials = 10000;
  std::uint64_t cal_seed = kNullSeed;
  cal->add_option("--mr", cal_mr, "Record length in samples")->required();
  cal->add_option("--pf", cal_pf, "False alarm probability")->capture_default_str();
  cal->add_option("--trials", cal_trials, "Noise-only trials")->capture_default_str();
  cal->add_option("--alpha-norm", cal_alpha, "Cyclic frequency in cycles/sample")->capture_default_str();
  cal->add_option("--sigma-sq", cal_sigma, "Received power to scale the threshold to")->capture_default_str();
  cal->add_option("--seed", cal_seed, "Seed (default: the detector's internal null seed)");

  // decimate
  auto* dec = app.add_subcommand("decimate", "Anti-alias filter and downsample");
  std::string dec_in, dec_out;
  int dec_factor = 1;
  dec->add_option("--in", dec_in, "Input .iq file")->required();
  dec->add_option("--factor", dec_factor, "Decimation factor")->check(CLI::PositiveNumber)->required();
  dec->add_option("--out", dec_out, "Output .iq file")->required();

  // figure
  auto* fig = app.add_subcommand("figure", "Write the CSV backing one of fig3, fig4, fig7, fig8, fig9");
  std::string fig_which, fig_out;
  FigureOptions fig_opt;
  std::optional<std::string> fig_snr;
  fig->add_option("--which", fig_which, "fig3 | fig4 | fig7 | fig8 | fig9")->required();
  fig->add_option("--trials", fig_opt.n_trials, "Trials per cell (fig7-9)")->capture_default_str();
  fig->add_option("--snr", fig_snr, "SNR list for fig7-9 (default -20:1:10)");
  fig->add_option("--seed", fig_opt.seed, "Master seed")->required();
  fig->add_option("--out", fig_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gsm) {
      gsm_cfg.seed = gsm_seed;
      save_iq(synth_gsm(gsm_cfg), gsm_out);
    } else if (*lte) {
      lte_cfg.seed = lte_seed;
      lte_cfg.cell_seed = lte_cell_seed.value_or(lte_seed);
      lte_cfg.fft_size = lte_fft.value_or(default_fft_size(lte_cfg.n_rb));
      save_iq(synth_lte(lte_cfg), lte_out);
    } else if (*chan) {
      const IqBuffer in = load_iq(ch_in);
      ch_cfg.snr_db = (ch_snr == "inf" || ch_snr == "+inf") ? std::numeric_limits<double>::infinity() : to_double(ch_snr);
      if (ch_offset == "uniform") {
        ch_cfg.timing_offset_mode = TimingOffsetMode::uniform_first_slot;
        if (ch_slot_samples)
          ch_cfg.slot_samples = *ch_slot_samples;
        else if (ch_standard)
          ch_cfg.slot_samples = static_cast<std::int64_t>(
              std::floor(profile_for(parse_standard(*ch_standard)).slot_seconds() * in.sample_rate_hz()));
        else
          throw ArgumentError("--timing-offset uniform needs --slot-samples or --standard");
      } else if (ch_offset != "none") {
        throw ArgumentError("--timing-offset must be none or uniform");
      }
      if (ch_snr_ref == "pre")
        ch_cfg.snr_reference = SnrReference::pre_fading;
      else if (ch_snr_ref != "post")
        throw ArgumentError("--snr-ref must be post or pre");
      save_iq(apply_channel(in, ch_cfg), ch_out);
    } else if (*spec) {
      const IqBuffer in = load_iq(sp_in);
      const CcfSpectrum s = ccf_spectrum(in, sp_tau, sp_max);
      with_output(sp_out, [&](std::ostream& os) { write_csv(os, s); });
    } else if (*cls) {
      const IqBuffer in = load_iq(cl_in);
      det_cfg.threshold_mode = parse_threshold_mode(cl_mode);
      det_cfg.profiles = parse_profiles(cl_profiles);
      const DecisionReport rep = classify(in, det_cfg);
      if (cl_format == "json")
        std::cout << to_json_line(rep) << "\n";
      else if (cl_format == "csv")
        write_csv(std::cout, rep);
      else
        throw ArgumentError("--format must be csv or json");
      return rep.any_detected() ? kOk : kNegative;
    } else if (*sw) {
      SweepConfig cfg;
      cfg.standard = parse_standard(sw_standard);
      cfg.snr_db_list = parse_list(sw_snr);
      for (double ms : parse_list(sw_obs)) cfg.observation_times_s.push_back(ms * 1e-3);
      cfg.p_f_list = parse_list(sw_pf);
      cfg.n_trials = sw_trials;
      cfg.master_seed = sw_seed;
      cfg.threshold_mode = parse_threshold_mode(sw_mode);
      const SweepResult r = run_detection_sweep(cfg);
      with_output(sw_out, [&](std::ostream& os) {
        if (cfg.p_f_list.size() == 1)
          write_sweep_csv(os, r);
        else
          write_pf_csv(os, {r});
      });
    } else if (*cal) {
      DetectorConfig d;
      d.p_f = cal_pf;
      d.threshold_mode = ThresholdMode::empirical_null;
      d.empirical_null_trials = cal_trials;
      d.null_seed = cal_seed;
      const double emp = threshold(d, cal_sigma, cal_mr, cal_alpha);
      d.threshold_mode = ThresholdMode::calibrated_closed_form;
      const double closed = threshold(d, cal_sigma, cal_mr);
      std::printf("m_r,p_f,trials,empirical_threshold,closed_form_threshold\n%lld,%.6g,%d,%.10g,%.10g\n",
                  static_cast<long long>(cal_mr), cal_pf, cal_trials, emp, closed);
    } else if (*dec) {
      save_iq(decimate(load_iq(dec_in), dec_factor), dec_out);
    } else if (*fig) {
      if (fig_snr) fig_opt.snr_db_list = parse_list(*fig_snr);
      emit_figure_data(parse_figure(fig_which), fig_out, fig_opt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}
