#pragma once

#include <cstddef>
#include <vector>

#include "oatk/data.hpp"

namespace oatk {

/// One delayed image per detector channel, stored [channel][row][col].
struct DelayStack {
  std::size_t n_channels = 0;
  ImageGrid grid;
  std::vector<float> values;

  float at(std::size_t channel, std::size_t row, std::size_t col) const noexcept {
    return values[(channel * grid.ny + row) * grid.nx + col];
  }
};

/// Default cap on n_channels * n_pixels for the per-channel transform.
/// A full 256 x 416 x 416 stack (about 177 MB) fits.
inline constexpr std::size_t kDefaultMaxDelayElements = std::size_t{1} << 26;

/// Maps every channel into image space: value(d, j) = s_d(tau_dj), with
/// tau_dj = |r_d - r_j| / sos - t0 in bins, linearly interpolated and zero
/// outside the recorded window. Throws invalid_argument when the stack
/// would exceed `max_elements`.
DelayStack delay_transform_channels(const Sinogram& sinogram, const ImageGrid& grid,
                                    double sos_mps,
                                    std::size_t max_elements = kDefaultMaxDelayElements);

/// Channel sum of `delay_transform_channels`.
Image delay_transform_summed(const Sinogram& sinogram, const ImageGrid& grid, double sos_mps);

/// Indicator vector with a single one at the grid index of `sos_mps`.
/// Throws invalid_argument for off-grid values.
std::vector<float> one_hot_sos(double sos_mps, const SosGrid& grid);

} // namespace oatk
