#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>

namespace cyclo::detail {

enum class FftDirection { forward = FFTW_FORWARD, backward = FFTW_BACKWARD };

// FFTW planning is not thread-safe; plans are created once per (size,
// direction) under a lock and executed through the new-array interface,
// which is. Plans live for the process lifetime.
inline fftw_plan fft_plan(std::size_t n, FftDirection dir) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, int>, fftw_plan> plans;
  std::lock_guard lock(mu);
  const auto key = std::make_pair(n, static_cast<int>(dir));
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  auto* in = fftw_alloc_complex(n);
  auto* out = fftw_alloc_complex(n);
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, static_cast<int>(dir),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  plans.emplace(key, p);
  return p;
}

/// Unnormalized DFT: out[k] = sum_n in[n] exp(-+j 2 pi k n / N).
inline void dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
                FftDirection dir) {
  const std::size_t n = in.size();
  if (n == 0) return;
  fftw_plan p = fft_plan(n, dir);
  // fftw_execute_dft does not modify the input for out-of-place transforms.
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace cyclo::detail
