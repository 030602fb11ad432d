#include "oatk/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "oatk/error.hpp"

namespace oatk {

namespace {

constexpr double kPi = std::numbers::pi;

// Half-sample symmetric index into [0, n).
std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return m < static_cast<std::ptrdiff_t>(n) ? static_cast<std::size_t>(m)
                                            : static_cast<std::size_t>(period - 1 - m);
}

double raised_cosine(double x) {
  // 0 at x <= 0, 1 at x >= 1.
  x = std::clamp(x, 0.0, 1.0);
  return 0.5 - 0.5 * std::cos(kPi * x);
}

std::pair<double, double> transition_widths(double lo_hz, double hi_hz) {
  const double span = hi_hz - lo_hz;
  return {std::min(lo_hz, span / 4.0), std::min(hi_hz / 12.0, span / 4.0)};
}

} // namespace

void EirSpec::validate() const {
  if (!enabled) return;
  require(center_frequency_hz > 0.0, ErrorCode::invalid_argument,
          "eir: center frequency must be > 0");
  require(fractional_bandwidth > 0.0, ErrorCode::invalid_argument,
          "eir: fractional bandwidth must be > 0");
  require(filter_length_samples >= 3 && filter_length_samples % 2 == 1,
          ErrorCode::invalid_argument, "eir: filter length must be odd and >= 3");
}

FirKernel eir_kernel(const EirSpec& spec, double sampling_rate_hz) {
  spec.validate();
  if (!spec.enabled) return FirKernel{{1.0}};
  require(spec.center_frequency_hz < 0.5 * sampling_rate_hz, ErrorCode::invalid_argument,
          "eir: center frequency above Nyquist");

  const double sigma_f = spec.fractional_bandwidth * spec.center_frequency_hz /
                         (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double sigma_t = 1.0 / (2.0 * kPi * sigma_f);
  const auto half = static_cast<std::ptrdiff_t>(spec.filter_length_samples / 2);

  std::vector<double> window, carrier;
  double sum_w = 0.0, sum_wc = 0.0;
  for (std::ptrdiff_t n = -half; n <= half; ++n) {
    const double t = static_cast<double>(n) / sampling_rate_hz;
    const double w = std::exp(-t * t / (2.0 * sigma_t * sigma_t));
    const double c = std::cos(2.0 * kPi * spec.center_frequency_hz * t);
    window.push_back(w);
    carrier.push_back(c);
    sum_w += w;
    sum_wc += w * c;
  }
  // Shift the carrier so the taps sum to zero.
  const double offset = sum_wc / sum_w;
  FirKernel k;
  k.taps.resize(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) k.taps[i] = window[i] * (carrier[i] - offset);

  // Normalize to unit peak gain on a dense frequency grid.
  constexpr int kGrid = 4096;
  double peak = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double f = 0.5 * sampling_rate_hz * i / kGrid;
    double h = 0.0;
    for (std::ptrdiff_t n = -half; n <= half; ++n)
      h += k.taps[static_cast<std::size_t>(n + half)] *
           std::cos(2.0 * kPi * f * static_cast<double>(n) / sampling_rate_hz);
    peak = std::max(peak, std::abs(h));
  }
  for (auto& t : k.taps) t /= peak;
  return k;
}

FirKernel derivative_kernel() { return FirKernel{{0.5, 0.0, -0.5}}; }

FirKernel convolve(const FirKernel& a, const FirKernel& b) {
  FirKernel out;
  out.taps.assign(a.taps.size() + b.taps.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.taps.size(); ++i)
    for (std::size_t j = 0; j < b.taps.size(); ++j) out.taps[i + j] += a.taps[i] * b.taps[j];
  return out;
}

Sinogram eir_filter(const Sinogram& sinogram, const EirSpec& spec) {
  const FirKernel k = eir_kernel(spec, sinogram.geometry().sampling_rate_hz);
  const std::size_t nt = sinogram.n_time(), nd = sinogram.n_detectors();
  const auto half = static_cast<std::ptrdiff_t>(k.half());
  std::vector<double> out(nt * nd);
  for (std::size_t d = 0; d < nd; ++d) {
    const auto x = sinogram.channel(d);
    for (std::size_t t = 0; t < nt; ++t) {
      double acc = 0.0;
      for (std::ptrdiff_t m = -half; m <= half; ++m)
        acc += k.taps[static_cast<std::size_t>(m + half)] *
               x[mirror_index(static_cast<std::ptrdiff_t>(t) - m, nt)];
      out[t * nd + d] = acc;
    }
  }
  return make_sinogram(sinogram.geometry(), out);
}

double bandpass_gain(double f_hz, double lo_hz, double hi_hz) noexcept {
  if (f_hz < lo_hz || f_hz > hi_hz) return 0.0;
  const auto [w_lo, w_hi] = transition_widths(lo_hz, hi_hz);
  double g = 1.0;
  if (w_lo > 0.0) g *= raised_cosine((f_hz - lo_hz) / w_lo);
  if (w_hi > 0.0) g *= raised_cosine((hi_hz - f_hz) / w_hi);
  return g;
}

Sinogram bandpass_filter(const Sinogram& sinogram, double lo_hz, double hi_hz) {
  const double fs = sinogram.geometry().sampling_rate_hz;
  require(lo_hz >= 0.0 && lo_hz < hi_hz && hi_hz < 0.5 * fs, ErrorCode::invalid_argument,
          "bandpass: need 0 <= lo < hi < sampling_rate / 2");
  const std::size_t nt = sinogram.n_time(), nd = sinogram.n_detectors();
  const detail::Dct1D dct(nt);

  // DCT-II bin k of a length-n record sits at k * fs / (2n).
  std::vector<double> gain(nt);
  for (std::size_t k = 0; k < nt; ++k)
    gain[k] = bandpass_gain(static_cast<double>(k) * fs / (2.0 * static_cast<double>(nt)),
                            lo_hz, hi_hz) /
              (2.0 * static_cast<double>(nt));

  std::vector<double> out(nt * nd), x(nt), c(nt);
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t t = 0; t < nt; ++t) x[t] = sinogram.at(t, d);
    dct.forward(x, c);
    for (std::size_t k = 0; k < nt; ++k) c[k] *= gain[k];
    dct.inverse(c, x);
    for (std::size_t t = 0; t < nt; ++t) out[t * nd + d] = x[t];
  }
  return make_sinogram(sinogram.geometry(), out);
}

Sinogram crop_leading_samples(const Sinogram& sinogram, std::size_t n) {
  require(n < sinogram.n_time(), ErrorCode::invalid_argument,
          "crop: cannot remove all time samples");
  ArrayGeometry g = sinogram.geometry();
  g.n_time_samples -= n;
  g.t0_offset_samples += n;
  const auto src = sinogram.samples();
  std::vector<float> samples(src.begin() + static_cast<std::ptrdiff_t>(n * g.n_detectors),
                             src.end());
  return Sinogram(g, std::move(samples), sinogram.wavelength_nm());
}

} // namespace oatk
