#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "oatk/data.hpp"

namespace oatk {

namespace detail {
class RealFft2D;
}

/// Shearlet coefficients: one real raster per filter, stored back to back
/// ([filter][row][col]). Filter 0 is the low-pass.
struct ShearletCoeffs {
  std::size_t n_filters = 0;
  std::size_t ny = 0;
  std::size_t nx = 0;
  std::vector<double> values;

  std::span<double> band(std::size_t f) { return {values.data() + f * ny * nx, ny * nx}; }
  std::span<const double> band(std::size_t f) const {
    return {values.data() + f * ny * nx, ny * nx};
  }
};

/// Identity of a single filter of the system.
struct ShearletBand {
  int scale = -1; ///< -1 for the low-pass
  int cone = -1;  ///< 0 horizontal, 1 vertical, -1 for the low-pass
  int shear = 0;
};

/// Band-limited, cone-adapted shearlet frame built in the FFT domain.
///
/// Radial bands are Meyer-type rings on the max-norm of the normalized
/// frequency; scale j (0 = coarsest) carries 2 ceil(2^(j/2)) + 1 shears per
/// cone. Raw windows are symmetrized under f -> -f and divided pointwise by
/// the square root of their summed squares, so the filters form a Parseval
/// frame: analysis preserves energy and synthesis (the adjoint) inverts it.
/// Filters are real and even, hence coefficients of real images are real.
class ShearletSystem {
public:
  /// n_scales = 0 picks the default: clamp(floor(log2(min(ny, nx))) - 4, 1, 4).
  ShearletSystem(std::size_t ny, std::size_t nx, std::size_t n_scales = 0);
  ~ShearletSystem();
  ShearletSystem(ShearletSystem&&) noexcept;
  ShearletSystem& operator=(ShearletSystem&&) noexcept;

  static std::size_t default_scales(std::size_t ny, std::size_t nx) noexcept;
  static std::size_t shears_per_cone(std::size_t scale) noexcept;

  std::size_t ny() const noexcept { return ny_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t n_scales() const noexcept { return n_scales_; }
  std::size_t n_filters() const noexcept { return bands_.size(); }
  const std::vector<ShearletBand>& bands() const noexcept { return bands_; }

  /// Frequency response of filter f on the half spectrum [ny][nx/2 + 1].
  std::span<const double> filter(std::size_t f) const;

  ShearletCoeffs analysis(std::span<const double> image) const;
  void synthesis(const ShearletCoeffs& coeffs, std::span<double> image) const;

  ShearletCoeffs analysis(const Image& image) const;
  Image synthesis(const ShearletCoeffs& coeffs, const ImageGrid& grid) const;

  /// Human-readable summary of the filter layout.
  std::string describe() const;

private:
  std::size_t ny_, nx_, n_scales_;
  std::vector<ShearletBand> bands_;
  std::vector<double> filters_;
  std::unique_ptr<detail::RealFft2D> fft_;
};

/// Entrywise sign(c) max(|c| - threshold, 0). Throws for threshold < 0.
void soft_threshold(std::span<double> coeffs, double threshold);
ShearletCoeffs soft_threshold(ShearletCoeffs coeffs, double threshold);

double l1_norm(const ShearletCoeffs& coeffs) noexcept;

} // namespace oatk
