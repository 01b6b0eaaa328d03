#pragma once

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace squall::fft {

/// FFTW planning is not thread-safe; execution of a local plan is.
inline std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

/// Unnormalized forward DFT of a real field, full complex spectrum,
/// row-major [n0][n1].
inline std::vector<std::complex<double>> forward2d(const double* in, int n0,
                                                   int n1) {
  const std::size_t n = static_cast<std::size_t>(n0) * n1;
  std::vector<std::complex<double>> src(n), out(n);
  for (std::size_t i = 0; i < n; ++i) src[i] = in[i];

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_2d(
        n0, n1, reinterpret_cast<fftw_complex*>(src.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

/// Inverse DFT normalized by 1/(n0*n1); returns the real part.
inline std::vector<double> inverse2d_real(std::vector<std::complex<double>> in,
                                          int n0, int n1) {
  const std::size_t n = static_cast<std::size_t>(n0) * n1;
  std::vector<std::complex<double>> out(n);

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_2d(n0, n1,
                            reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }

  std::vector<double> real(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) real[i] = out[i].real() * scale;
  return real;
}

}  // namespace squall::fft
