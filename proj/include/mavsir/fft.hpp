#pragma once

// Thin FFTW wrapper for the 2D transforms used by the texture and edge
// descriptors.

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "mavsir/error.hpp"

namespace mavsir::detail {

using Spectrum = std::vector<std::complex<double>>;

// FFTW's planner is not reentrant; execution with a private plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Unnormalized 2D DFT of a row-major width x height array. The inverse
/// (sign +1) is scaled by 1/(width*height) so fft2(fft2(x), true) == x.
inline Spectrum fft2(const Spectrum& in, int width, int height, bool inverse = false) {
  require(in.size() == static_cast<std::size_t>(width) * height, "fft2: size mismatch");
  Spectrum out(in.size());
  Spectrum scratch = in;  // planning may clobber the input
  auto* src = reinterpret_cast<fftw_complex*>(scratch.data());
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(height, width, src, dst, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                            FFTW_ESTIMATE);
  }
  if (!plan) throw NumericalError("fftw: plan creation failed");
  scratch = in;
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  if (inverse) {
    const double s = 1.0 / static_cast<double>(in.size());
    for (auto& z : out) z *= s;
  }
  return out;
}

}  // namespace mavsir::detail
