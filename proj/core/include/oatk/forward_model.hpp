#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oatk/data.hpp"
#include "oatk/filters.hpp"

namespace oatk {

/// Speed-of-sound bounds accepted by the acoustic operators.
inline constexpr double kMinPlausibleSos = 1300.0;
inline constexpr double kMaxPlausibleSos = 1700.0;

/// Matrix-free acoustic forward model for a homogeneous speed of sound.
///
/// Each pixel is a point absorber. Its contribution to channel d is
/// scattered onto the time axis at the arrival bin |r_d - r_j| / c by
/// two-tap linear interpolation, weighted by 1 / max(distance, pixel pitch).
/// Every channel is then filtered with the central difference convolved
/// with the EIR. Scattering happens on a buffer padded by the kernel half
/// width on both sides, so cropping leading samples (and shifting t0)
/// leaves the overlapping output bins unchanged.
///
/// `adjoint` is the exact transpose of `apply`: correlation with the same
/// kernel followed by a gather with the same interpolation weights.
class ForwardOperator {
public:
  ForwardOperator(ArrayGeometry geometry, ImageGrid grid, double sos_mps, EirSpec eir = {});

  const ArrayGeometry& geometry() const noexcept { return geometry_; }
  const ImageGrid& grid() const noexcept { return grid_; }
  double sos_mps() const noexcept { return sos_mps_; }
  const EirSpec& eir() const noexcept { return eir_; }
  /// Time-domain kernel applied to each scattered channel.
  const FirKernel& kernel() const noexcept { return kernel_; }

  std::size_t image_size() const noexcept { return grid_.size(); }
  std::size_t sinogram_size() const noexcept {
    return geometry_.n_time_samples * geometry_.n_detectors;
  }

  ForwardOperator with_sos(double sos_mps) const;

  /// image: row-major [ny x nx]; sinogram: time-major [n_time x n_det].
  void apply(std::span<const double> image, std::span<double> sinogram) const;
  void adjoint(std::span<const double> sinogram, std::span<double> image) const;

  std::vector<double> apply(std::span<const double> image) const;
  std::vector<double> adjoint(std::span<const double> sinogram) const;

  /// Throws dimension_mismatch unless the image/sinogram fit this operator.
  void check_image(const Image& image) const;
  void check_sinogram(const Sinogram& sinogram) const;

private:
  double pixel_weight(double dist) const noexcept { return 1.0 / std::max(dist, min_dist_); }

  ArrayGeometry geometry_;
  ImageGrid grid_;
  double sos_mps_;
  EirSpec eir_;
  FirKernel kernel_;
  std::vector<Point2> detectors_;
  double min_dist_;
};

Sinogram forward_apply(const ForwardOperator& op, const Image& image);
Image adjoint_apply(const ForwardOperator& op, const Sinogram& sinogram);

/// Sinogram-shaped 0/1 mask of the bins the forward model can reach.
class ReachMask {
public:
  ReachMask(std::size_t n_time, std::size_t n_detectors)
      : n_time_(n_time), n_detectors_(n_detectors), bits_(n_time * n_detectors, 0) {}

  std::size_t n_time() const noexcept { return n_time_; }
  std::size_t n_detectors() const noexcept { return n_detectors_; }
  bool at(std::size_t t, std::size_t d) const noexcept { return bits_[t * n_detectors_ + d] != 0; }
  void set(std::size_t t, std::size_t d, bool v) noexcept {
    bits_[t * n_detectors_ + d] = v ? 1 : 0;
  }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::size_t count() const noexcept;

  /// Zeroes every masked-out bin of a time-major buffer in place.
  void apply(std::span<double> sinogram) const;

private:
  std::size_t n_time_, n_detectors_;
  std::vector<std::uint8_t> bits_;
};

/// Bins from floor(d_min / (c dt)) - t0 - h through floor(d_max / (c dt)) -
/// t0 + 1 + h for each detector, where d_min/d_max are the extreme
/// pixel-to-detector distances and h is the kernel half width.
ReachMask reach_mask(const ForwardOperator& op);

} // namespace oatk
