#include <gtest/gtest.h>

#include "cyclo/signal_model.hpp"

namespace cyclo {
namespace {

TEST(Rational, ReducesAndNormalizesSign) {
  const Rational r(26000, -15 * 2);
  EXPECT_EQ(r.num(), -2600);
  EXPECT_EQ(r.den(), 3);
  EXPECT_THROW(Rational(1, 0), ArgumentError);
}

TEST(Profiles, GsmExactConstants) {
  const auto p = profile_for(StandardId::GSM);
  EXPECT_EQ(p.slot_duration_s, Rational(15, 26000));
  EXPECT_EQ(p.fundamental_cf_hz, Rational(26000, 15));
  EXPECT_NEAR(p.alpha_hz(), 1733.3333333333333, 1e-10);
  EXPECT_NEAR(p.slot_seconds() * 1e6, 576.923, 1e-3);
  EXPECT_FALSE(p.secondary_cf_hz.has_value());
  // rounded literature values stay within a fraction of a percent
  EXPECT_NEAR(kGsmRoundedCfHz, p.alpha_hz(), 0.5);
  EXPECT_NEAR(kGsmRoundedSlotSeconds, p.slot_seconds(), 1e-7);
}

TEST(Profiles, LteExactConstants) {
  const auto p = profile_for(StandardId::LTE);
  EXPECT_EQ(p.fundamental_cf_hz, Rational(2000));
  EXPECT_EQ(p.slot_duration_s, Rational(1, 2000));
  ASSERT_TRUE(p.secondary_cf_hz.has_value());
  EXPECT_EQ(*p.secondary_cf_hz, Rational(200));
}

TEST(Profiles, CfTimesSlotIsExactlyOne) {
  for (auto id : {StandardId::GSM, StandardId::LTE}) {
    const auto p = profile_for(id);
    EXPECT_EQ(p.fundamental_cf_hz * p.slot_duration_s, Rational(1));
    EXPECT_EQ(p.harmonic(7) * p.slot_duration_s, Rational(7));
    EXPECT_EQ(profile_for(id), p);
  }
}

TEST(IqBufferTest, PeriodIsDerived) {
  const IqBuffer b({{1, 0}, {0, 1}}, 2e6, 869e6);
  EXPECT_EQ(b.size(), 2u);
  EXPECT_DOUBLE_EQ(b.sample_period_s(), 0.5e-6);
  EXPECT_DOUBLE_EQ(b.duration_s(), 1e-6);
  EXPECT_EQ(b.center_freq_hz(), 869e6);
  EXPECT_THROW(IqBuffer({{1, 0}}, 0.0), ArgumentError);
  EXPECT_THROW(IqBuffer({{1, 0}}, -5.0), ArgumentError);
}

TEST(Standards, Parse) {
  EXPECT_EQ(parse_standard("gsm"), StandardId::GSM);
  EXPECT_EQ(parse_standard("LTE"), StandardId::LTE);
  EXPECT_THROW(parse_standard("wimax"), ArgumentError);
}

}  // namespace
}  // namespace cyclo
