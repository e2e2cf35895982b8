#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cyclo/channel_sim.hpp"
#include "cyclo/detector.hpp"
#include "cyclo/waveform_synth.hpp"

namespace cyclo {
namespace {

TEST(Variance, MeanPower) {
  const IqBuffer ones(std::vector<cplx>(100, cplx(1, 0)), 1.0);
  EXPECT_EQ(estimate_variance(ones), 1.0);
  const IqBuffer n = synth_noise(1000, 1.0, 3);
  std::vector<cplx> g(n.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * n[i];
  EXPECT_EQ(estimate_variance(IqBuffer(g, 1.0)), 4.0 * estimate_variance(n));
  EXPECT_THROW(estimate_variance(IqBuffer({}, 1.0)), ArgumentError);
}

TEST(Variance, Concentration) {
  const double v = estimate_variance(synth_noise(1000000, 1.0, 11));
  EXPECT_GE(v, 0.997);
  EXPECT_LE(v, 1.003);
}

TEST(Threshold, UnnormalizedInversion) {
  DetectorConfig cfg{.p_f = 1e-2, .threshold_mode = ThresholdMode::paper_eq5};
  EXPECT_NEAR(threshold(cfg, 1.0, 10000), 2.145966026289347, 1e-12);
  // no dependence on record length
  EXPECT_EQ(threshold(cfg, 1.0, 10), threshold(cfg, 1.0, 100000));
}

TEST(Threshold, CalibratedClosedForm) {
  DetectorConfig cfg{.p_f = 1e-2};
  EXPECT_NEAR(threshold(cfg, 1.0, 10000), 0.021459660262893473, 1e-15);
  EXPECT_NEAR(threshold(cfg, 3.0, 10000), 3.0 * 0.021459660262893473, 1e-14);
}

TEST(Threshold, ClosedFormMatchesEmpiricalNull) {
  // 1e5 noise-only records of 1e4 samples; the (1 - P_F) quantile of
  // |C(alpha, 0)| must agree with the closed form within 5%.
  DetectorConfig cfg{.p_f = 1e-2, .threshold_mode = ThresholdMode::empirical_null,
                     .empirical_null_trials = 100000};
  const double emp = threshold(cfg, 1.0, 10000, kDefaultNullCf);
  EXPECT_NEAR(emp / 0.021459660262893473, 1.0, 0.05);
}

TEST(Threshold, MonotoneAndVanishingInPf) {
  for (auto mode : {ThresholdMode::paper_eq5, ThresholdMode::calibrated_closed_form, ThresholdMode::empirical_null}) {
    DetectorConfig cfg{.threshold_mode = mode, .empirical_null_trials = 2000};
    double prev = INFINITY;
    for (double pf : {1e-3, 1e-2, 0.05, 0.2, 0.5, 0.9}) {
      cfg.p_f = pf;
      const double g = threshold(cfg, 1.0, 4096, 0.01);
      EXPECT_LT(g, prev) << to_string(mode) << " p_f=" << pf;
      prev = g;
    }
    cfg.p_f = 1.0 - 1e-12;
    EXPECT_LT(threshold(cfg, 1.0, 4096, 0.01), mode == ThresholdMode::empirical_null ? 0.01 : 1e-5);
  }
}

TEST(Threshold, Errors) {
  EXPECT_THROW(threshold({.p_f = 0.0}, 1.0, 10), ConfigError);
  EXPECT_THROW(threshold({.p_f = 1.0}, 1.0, 10), ConfigError);
  EXPECT_THROW(threshold({.p_f = 0.1}, 0.0, 10), ArgumentError);
  EXPECT_THROW(threshold({.p_f = 0.1}, 1.0, 0), ArgumentError);
  DetectorConfig h{.harmonics = 3};
  EXPECT_THROW(threshold(h, 1.0, 10), ConfigError);
}

TEST(Window, WholePeriods) {
  EXPECT_EQ(whole_period_window(10833, 26000.0 / 15, 1625000.0 / 6 * 4), 10625);  // 17 GSM slots
  EXPECT_EQ(whole_period_window(19200, 2000.0, 1.92e6), 19200);
  EXPECT_EQ(whole_period_window(10000, 2000.0, 1.92e6), 9600);
  EXPECT_EQ(whole_period_window(100, 2000.0, 1.92e6), 100);  // less than one period
}

IqBuffer gsm_reference(std::uint64_t seed) {
  const IqBuffer x = synth_gsm({.num_slots = 1000, .oversample = 4, .seed = seed});
  return apply_channel(x, {.snr_db = 20.0, .seed = seed + 1});
}

TEST(Classify, NoiseOnlyRarelyAlarms) {
  int alarms = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    const auto rep = classify(synth_noise(20000, 1.0, 1000 + t, 1.92e6), {});
    ASSERT_EQ(rep.profiles.size(), 2u);
    for (const auto& p : rep.profiles) alarms += p.detected;
  }
  // 800 tests at P_F = 0.01: Binomial(800, 0.01), mean 8; P(X > 22) < 1e-4
  EXPECT_LE(alarms, 22);
}

TEST(Classify, GsmAtTwentyDb) {
  for (auto mode : {ThresholdMode::calibrated_closed_form, ThresholdMode::empirical_null}) {
    DetectorConfig cfg{.threshold_mode = mode, .empirical_null_trials = 300};
    const auto rep = classify(gsm_reference(5), cfg);
    EXPECT_EQ(rep.label, Label::GSM) << to_string(mode);
    EXPECT_TRUE(rep.find(StandardId::GSM)->detected);
  }
}

TEST(Classify, ReportInvariants) {
  const IqBuffer r = gsm_reference(7);
  const auto rep = classify(r, {});
  double best = 0.0;
  Label want = Label::unknown;
  for (const auto& p : rep.profiles) {
    EXPECT_EQ(p.detected, p.statistic > p.threshold);
    if (p.detected && p.ratio() > best) {
      best = p.ratio();
      want = label_for(p.id);
    }
  }
  EXPECT_EQ(rep.label, want);
  EXPECT_NEAR(rep.sigma_r_sq, mean_power(r.samples()), 1e-12 * rep.sigma_r_sq);
}

TEST(Classify, ScalingInvariance) {
  const IqBuffer r = gsm_reference(9);
  const cplx g(-0.02, 0.37);
  std::vector<cplx> s(r.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = g * r[i];
  const IqBuffer scaled(s, r.sample_rate_hz());
  for (auto mode : {ThresholdMode::calibrated_closed_form, ThresholdMode::empirical_null}) {
    DetectorConfig cfg{.threshold_mode = mode, .empirical_null_trials = 300};
    const auto a = classify(r, cfg);
    const auto b = classify(scaled, cfg);
    EXPECT_EQ(a.label, b.label);
    for (std::size_t p = 0; p < a.profiles.size(); ++p) {
      EXPECT_EQ(a.profiles[p].detected, b.profiles[p].detected);
      EXPECT_NEAR(b.profiles[p].statistic, std::norm(g) * a.profiles[p].statistic, 1e-12 * b.profiles[p].statistic);
    }
  }
}

TEST(Classify, UnnormalizedModeIsNotScaleInvariant) {
  const IqBuffer r = gsm_reference(9);
  std::vector<cplx> s(r.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 200.0 * r[i];
  const DetectorConfig cfg{.threshold_mode = ThresholdMode::paper_eq5};
  EXPECT_EQ(classify(r, cfg).label, Label::unknown);
  EXPECT_EQ(classify(IqBuffer(s, r.sample_rate_hz()), cfg).label, Label::GSM);
}

TEST(Classify, CfoInvariance) {
  const IqBuffer r = gsm_reference(13);
  std::vector<cplx> s(r.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = r[i] * std::polar(1.0, 2 * std::numbers::pi * 25e3 * static_cast<double>(i) * r.sample_period_s());
  const auto a = classify(r, {});
  const auto b = classify(IqBuffer(s, r.sample_rate_hz()), {});
  EXPECT_EQ(a.label, b.label);
  for (std::size_t p = 0; p < a.profiles.size(); ++p) {
    EXPECT_EQ(a.profiles[p].detected, b.profiles[p].detected);
    EXPECT_NEAR(a.profiles[p].statistic, b.profiles[p].statistic, 1e-12 * a.profiles[p].statistic);
  }
}

TEST(Classify, Deterministic) {
  const IqBuffer r = gsm_reference(3);
  const DetectorConfig cfg{.threshold_mode = ThresholdMode::empirical_null, .empirical_null_trials = 200};
  EXPECT_EQ(to_json_line(classify(r, cfg)), to_json_line(classify(r, cfg)));
}

TEST(Classify, TooShort) {
  const IqBuffer r = synth_noise(1000, 1.0, 1, 1.92e6);  // < 2 GSM slots (2216 samples)
  try {
    classify(r, {});
    FAIL() << "expected ArgumentError";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("2216"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(classify(synth_noise(2216, 1.0, 1, 1.92e6), {}));
}

TEST(Classify, HarmonicCombiningNeedsEmpiricalThreshold) {
  const IqBuffer r = gsm_reference(21);
  EXPECT_THROW(classify(r, {.harmonics = 3}), ConfigError);
  const auto rep = classify(r, {.threshold_mode = ThresholdMode::empirical_null, .empirical_null_trials = 200,
                               .harmonics = 3});
  EXPECT_EQ(rep.label, Label::GSM);
}

TEST(Serialization, CsvAndJson) {
  DecisionReport rep;
  rep.sigma_r_sq = 1.5;
  rep.label = Label::LTE;
  rep.profiles = {{StandardId::GSM, 1733.3, 0.01, 0.02, false, 100}, {StandardId::LTE, 2000, 0.5, 0.25, true, 96}};
  std::ostringstream os;
  write_csv(os, rep);
  EXPECT_EQ(os.str(),
            "profile,statistic,threshold,detected,label\n"
            "GSM,0.01,0.02,false,LTE\n"
            "LTE,0.5,0.25,true,LTE\n");
  const auto j = nlohmann::json::parse(to_json_line(rep));
  EXPECT_EQ(j["label"], "LTE");
  EXPECT_EQ(j["profiles"][1]["detected"], true);
  EXPECT_EQ(j["profiles"][0]["profile"], "GSM");
  EXPECT_EQ(to_json_line(rep).find('\n'), std::string::npos);
}

}  // namespace
}  // namespace cyclo
