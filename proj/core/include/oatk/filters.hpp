#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oatk/data.hpp"

namespace oatk {

/// Electrical impulse response of the detection chain, modelled as a
/// zero-phase Gaussian-windowed band-pass FIR.
struct EirSpec {
  bool enabled = true;
  double center_frequency_hz = 4e6;
  /// Full width at half maximum of the magnitude response over the center
  /// frequency.
  double fractional_bandwidth = 1.53;
  std::size_t filter_length_samples = 129;

  void validate() const;
};

/// Odd-length, centered FIR. taps[half() + m] is the coefficient of lag m.
struct FirKernel {
  std::vector<double> taps;

  std::size_t half() const noexcept { return taps.size() / 2; }
};

/// EIR taps sampled at `sampling_rate_hz`. The kernel sums to zero (no DC
/// gain) and is scaled so its peak magnitude response equals one. With
/// the EIR disabled this is the identity kernel {1}.
FirKernel eir_kernel(const EirSpec& spec, double sampling_rate_hz);

/// Central first difference, per sample: y[n] = (x[n+1] - x[n-1]) / 2.
FirKernel derivative_kernel();

/// Full linear convolution of two kernels.
FirKernel convolve(const FirKernel& a, const FirKernel& b);

/// Per-channel zero-phase EIR filtering. Channels are extended by
/// half-sample mirroring so constant channels map to zero.
Sinogram eir_filter(const Sinogram& sinogram, const EirSpec& spec);

/// Per-channel zero-phase band-pass. Implemented in the DCT-II domain
/// (mirror-extended signal). The gain is zero outside [lo_hz, hi_hz] and
/// rises with raised-cosine ramps of width min(lo, (hi-lo)/4) at the low
/// edge and min(hi/12, (hi-lo)/4) at the high edge.
Sinogram bandpass_filter(const Sinogram& sinogram, double lo_hz, double hi_hz);

/// Gain of `bandpass_filter` at frequency f.
double bandpass_gain(double f_hz, double lo_hz, double hi_hz) noexcept;

/// Drops the first n samples of every channel and records them in the
/// geometry's t0 offset, so absolute arrival times stay unchanged.
Sinogram crop_leading_samples(const Sinogram& sinogram, std::size_t n);

} // namespace oatk
