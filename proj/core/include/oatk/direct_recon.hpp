#pragma once

#include <span>
#include <string_view>

#include "oatk/data.hpp"

namespace oatk {

enum class DirectMethod { bp, dmas_cf };

struct DirectReconConfig {
  DirectMethod method = DirectMethod::bp;
  double sos_mps = 1500.0;
  bool clamp_negatives = false;
};

/// Universal backprojection: image_j = (1/N) sum_d b_d(tau_dj) with
/// b(t) = 2 p(t) - 2 t dp/dt, t the absolute arrival time. The derivative
/// uses central differences (one-sided at the record ends). Delays outside
/// the recorded window contribute zero. Output may be negative.
Image backproject(const Sinogram& sinogram, const ImageGrid& grid, double sos_mps);

/// Per-pixel delay-multiply-and-sum value with its coherence factor.
struct DmasCfValue {
  double dmas = 0.0;
  double cf = 0.0;
  double value = 0.0;
};

/// DMAS = sum_{i<j} sign(s_i s_j) sqrt|s_i s_j|, CF = (sum s)^2 / (N sum s^2)
/// (0 when all samples vanish), value = DMAS * CF. N counts every channel,
/// including those whose delay fell outside the record.
DmasCfValue dmas_cf_combine(std::span<const double> delayed);

/// Delay-multiply-and-sum with coherence factor, unfiltered.
Image dmas_cf(const Sinogram& sinogram, const ImageGrid& grid, double sos_mps);

Image reconstruct_direct(const Sinogram& sinogram, const ImageGrid& grid,
                         const DirectReconConfig& config);

std::string_view to_string(DirectMethod method) noexcept;

} // namespace oatk
