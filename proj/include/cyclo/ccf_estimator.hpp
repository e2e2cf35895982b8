#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "cyclo/detail/fft.hpp"
#include "cyclo/signal_model.hpp"

namespace cyclo {

namespace detail {

/// exp(-j 2 pi f m) for m = 0, 1, 2, ... with f in cycles/sample. Built by
/// complex recurrence and resynchronized to the exact angle every 2^14
/// steps, which keeps the phase error far below 1e-10 over any buffer.
class PhasorRecurrence {
 public:
  static constexpr std::int64_t kResyncInterval = std::int64_t{1} << 14;

  explicit PhasorRecurrence(double cycles_per_sample)
      : f_(static_cast<long double>(cycles_per_sample)), step_(exact(1)) {}

  /// Phasor for the current index, then advance.
  cplx next() {
    const cplx out = z_;
    ++m_;
    z_ = (m_ % kResyncInterval == 0) ? exact(m_) : z_ * step_;
    return out;
  }

  cplx exact(std::int64_t m) const {
    // reduce the angle in extended precision before leaving the unit circle;
    // the symmetric range keeps e(-f) the exact conjugate of e(f)
    long double cycles = f_ * static_cast<long double>(m);
    cycles -= std::nearbyint(cycles);
    return std::polar(1.0, static_cast<double>(-2.0L * std::numbers::pi_v<long double> * cycles));
  }

 private:
  long double f_;
  cplx step_;
  cplx z_{1.0, 0.0};
  std::int64_t m_ = 0;
};

/// Neumaier-compensated complex sum.
class CompensatedSum {
 public:
  void add(const cplx& v) {
    add_part(re_, cre_, v.real());
    add_part(im_, cim_, v.imag());
  }
  cplx result() const { return {re_ + cre_, im_ + cim_}; }

 private:
  static void add_part(double& s, double& c, double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double re_ = 0.0, im_ = 0.0, cre_ = 0.0, cim_ = 0.0;
};

/// Plain running sum; the first term initializes it without an addition.
template <class T>
class NaiveSum {
 public:
  void add(const T& v) {
    if (empty_) {
      s_ = v;
      empty_ = false;
    } else {
      s_ = s_ + v;
    }
  }
  T result() const { return s_; }

 private:
  T s_{};
  bool empty_ = true;
};

/// Direct CCF accumulation: sum_m r(m) conj(r(m + tau)) e(m), with e(m) the
/// cyclic phasor. Per lag term: two complex multiplications and one
/// addition into the accumulator. Generic over the scalar so the arithmetic
/// can be instrumented.
template <class T, class Accumulator, class Phasor>
T ccf_accumulate(std::span<const T> r, std::size_t tau, Phasor&& phasor, Accumulator&& acc) {
  using std::conj;
  const std::size_t terms = r.size() - tau;
  for (std::size_t m = 0; m < terms; ++m) {
    const T lag = r[m] * conj(r[m + tau]);
    acc.add(lag * T(phasor()));
  }
  return acc.result();
}

}  // namespace detail

/// C(alpha, tau) = (1/M_r) sum_{m=0}^{M_r-1-tau} r(m) conj(r(m+tau)) exp(-j 2 pi alpha m T_s).
/// The divisor is the full record length for every tau.
inline CcfEstimate estimate_ccf(const IqBuffer& r, double alpha_hz, std::int64_t tau_samples) {
  const auto m_r = static_cast<std::int64_t>(r.size());
  if (m_r < 1) throw ArgumentError("estimate_ccf: empty buffer");
  if (tau_samples < 0 || tau_samples >= m_r)
    throw ArgumentError("estimate_ccf: tau_samples must lie in [0, M_r)");
  detail::PhasorRecurrence phasor(alpha_hz * r.sample_period_s());
  const cplx sum = detail::ccf_accumulate<cplx>(std::span<const cplx>(r.samples()),
                                                static_cast<std::size_t>(tau_samples),
                                                [&] { return phasor.next(); }, detail::CompensatedSum{});
  return {alpha_hz, tau_samples, sum / static_cast<double>(m_r), m_r};
}

/// CCF magnitudes on the natural cyclic-frequency grid alpha_k = k / (M_r T_s).
struct CcfSpectrum {
  std::vector<double> alphas_hz;
  std::vector<double> magnitudes;
  std::int64_t tau_samples = 0;
  std::int64_t m_r = 0;

  double grid_spacing_hz() const { return alphas_hz.size() > 1 ? alphas_hz[1] - alphas_hz[0] : 0.0; }
  std::size_t size() const { return alphas_hz.size(); }
};

/// Complex CCF values on grid points k = 0..K, alpha_k <= max_alpha_hz, via one DFT.
inline std::vector<cplx> ccf_grid(const IqBuffer& r, std::int64_t tau_samples, double max_alpha_hz) {
  const auto m_r = static_cast<std::int64_t>(r.size());
  if (m_r < 1) throw ArgumentError("ccf_spectrum: empty buffer");
  if (tau_samples < 0 || tau_samples >= m_r)
    throw ArgumentError("ccf_spectrum: tau_samples must lie in [0, M_r)");
  if (!(max_alpha_hz >= 0.0) || max_alpha_hz > r.sample_rate_hz() / 2.0)
    throw ArgumentError("ccf_spectrum: max_alpha_hz must lie in [0, sample_rate/2]");

  const auto& s = r.samples();
  std::vector<cplx> lag(static_cast<std::size_t>(m_r)), spec(static_cast<std::size_t>(m_r));
  for (std::int64_t m = 0; m + tau_samples < m_r; ++m)
    lag[static_cast<std::size_t>(m)] = s[static_cast<std::size_t>(m)] * std::conj(s[static_cast<std::size_t>(m + tau_samples)]);
  detail::dft(lag, spec, detail::FftDirection::forward);

  const double spacing = r.sample_rate_hz() / static_cast<double>(m_r);
  auto k_max = static_cast<std::int64_t>(std::floor(max_alpha_hz / spacing));
  // guard against floor landing one bin high through rounding
  while (k_max > 0 && static_cast<double>(k_max) * spacing > max_alpha_hz) --k_max;
  k_max = std::min(k_max, m_r - 1);
  spec.resize(static_cast<std::size_t>(k_max + 1));
  for (auto& v : spec) v /= static_cast<double>(m_r);
  return spec;
}

inline CcfSpectrum ccf_spectrum(const IqBuffer& r, std::int64_t tau_samples, double max_alpha_hz) {
  const auto values = ccf_grid(r, tau_samples, max_alpha_hz);
  CcfSpectrum out;
  out.tau_samples = tau_samples;
  out.m_r = static_cast<std::int64_t>(r.size());
  const double spacing = r.sample_rate_hz() / static_cast<double>(r.size());
  out.alphas_hz.reserve(values.size());
  out.magnitudes.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.alphas_hz.push_back(static_cast<double>(k) * spacing);
    out.magnitudes.push_back(std::abs(values[k]));
  }
  return out;
}

struct HarmonicPeak {
  int k = 0;
  double magnitude = 0.0;
  double alpha_hz = 0.0;  // grid point holding the maximum
  std::size_t bin = 0;
};

/// Largest magnitude within one grid bin of k * fundamental, k = 1..k_max.
/// Harmonics beyond the spectrum's last bin are not reported.
inline std::vector<HarmonicPeak> harmonic_peaks(const CcfSpectrum& s, double fundamental_hz, int k_max) {
  std::vector<HarmonicPeak> out;
  if (k_max <= 0 || s.size() < 2) return out;
  const double spacing = s.grid_spacing_hz();
  if (!(fundamental_hz > spacing)) throw ArgumentError("harmonic_peaks: fundamental must exceed the grid spacing");
  for (int k = 1; k <= k_max; ++k) {
    const auto centre = static_cast<std::int64_t>(std::llround(k * fundamental_hz / spacing));
    if (centre >= static_cast<std::int64_t>(s.size())) break;
    HarmonicPeak best{k, -1.0, 0.0, 0};
    for (std::int64_t j = std::max<std::int64_t>(centre - 1, 0);
         j <= std::min<std::int64_t>(centre + 1, static_cast<std::int64_t>(s.size()) - 1); ++j) {
      const auto u = static_cast<std::size_t>(j);
      if (s.magnitudes[u] > best.magnitude) best = {k, s.magnitudes[u], s.alphas_hz[u], u};
    }
    out.push_back(best);
  }
  return out;
}

/// CSV with header `alpha_hz,magnitude`, LF line endings.
inline void write_csv(std::ostream& os, const CcfSpectrum& s) {
  os << "alpha_hz,magnitude\n";
  char line[64];
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::snprintf(line, sizeof line, "%.12g,%.12g\n", s.alphas_hz[k], s.magnitudes[k]);
    os << line;
  }
}

}  // namespace cyclo
