#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "oatk/data.hpp"

namespace oatk::detail {

/// Channel-major copy of a sinogram: channel d occupies [d*nt, (d+1)*nt).
inline std::vector<double> channel_major(const Sinogram& s) {
  const std::size_t nt = s.n_time(), nd = s.n_detectors();
  std::vector<double> out(nt * nd);
  const auto src = s.samples();
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t d = 0; d < nd; ++d) out[d * nt + t] = src[t * nd + d];
  return out;
}

/// Linear interpolation of `channel` at fractional bin `pos`; zero outside
/// the recorded window [0, nt - 1].
inline double sample_linear(const double* channel, std::size_t nt, double pos) noexcept {
  if (!(pos >= 0.0) || pos > static_cast<double>(nt - 1)) return 0.0;
  const double base = std::floor(pos);
  const auto i0 = static_cast<std::size_t>(base);
  const double frac = pos - base;
  if (i0 + 1 >= nt) return channel[i0];
  return (1.0 - frac) * channel[i0] + frac * channel[i0 + 1];
}

} // namespace oatk::detail
