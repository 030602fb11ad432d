#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oatk/geometry.hpp"

namespace oatk {

/// Recorded pressure signals, stored time-major: sample (t, d) lives at
/// index t * n_detectors + d. Dimensions are taken from the geometry.
class Sinogram {
public:
  Sinogram() = default;
  /// Zero-filled sinogram for `geometry`.
  explicit Sinogram(ArrayGeometry geometry);
  Sinogram(ArrayGeometry geometry, std::vector<float> samples,
           std::optional<double> wavelength_nm = std::nullopt);

  const ArrayGeometry& geometry() const noexcept { return geometry_; }
  std::size_t n_time() const noexcept { return geometry_.n_time_samples; }
  std::size_t n_detectors() const noexcept { return geometry_.n_detectors; }
  std::optional<double> wavelength_nm() const noexcept { return wavelength_nm_; }

  std::span<const float> samples() const noexcept { return samples_; }
  float at(std::size_t t, std::size_t d) const noexcept {
    return samples_[t * n_detectors() + d];
  }
  /// Copy of channel `d` as doubles.
  std::vector<double> channel(std::size_t d) const;

private:
  ArrayGeometry geometry_{};
  std::vector<float> samples_;
  std::optional<double> wavelength_nm_;
};

/// Reconstructed initial pressure on a square-pixel raster, row-major with
/// row 0 at the top.
class Image {
public:
  Image() = default;
  explicit Image(ImageGrid grid);
  Image(ImageGrid grid, std::vector<float> pixels);

  const ImageGrid& grid() const noexcept { return grid_; }
  std::size_t nx() const noexcept { return grid_.nx; }
  std::size_t ny() const noexcept { return grid_.ny; }
  std::size_t size() const noexcept { return pixels_.size(); }

  std::span<const float> pixels() const noexcept { return pixels_; }
  float at(std::size_t row, std::size_t col) const noexcept {
    return pixels_[row * grid_.nx + col];
  }

private:
  ImageGrid grid_{};
  std::vector<float> pixels_;
};

/// Conversions between the float32 storage types and the double buffers the
/// numerical kernels operate on.
std::vector<double> to_double(std::span<const float> values);
std::vector<float> to_float(std::span<const double> values);
Sinogram make_sinogram(const ArrayGeometry& geometry, std::span<const double> samples);
Image make_image(const ImageGrid& grid, std::span<const double> pixels);

/// Entrywise max(x, 0).
Image clamp_negatives(const Image& image);

/// Wavelength-ordered images of the same scene.
struct MultispectralStack {
  std::vector<Image> images;
  std::vector<double> wavelengths_nm;

  void validate() const;
  std::size_t n_pixels() const { return images.empty() ? 0 : images.front().size(); }
};

/// 700, 710, ..., 980 nm.
std::vector<double> default_wavelengths_nm();

/// Reference absorption spectra, one row per chromophore.
struct SpectraMatrix {
  std::vector<std::string> chromophores;
  std::vector<double> wavelengths_nm;
  /// Row-major [n_chromophores x n_wavelengths].
  std::vector<double> absorption;

  void validate() const;
  std::size_t n_chromophores() const noexcept { return chromophores.size(); }
  std::size_t n_wavelengths() const noexcept { return wavelengths_nm.size(); }
  double at(std::size_t chromophore, std::size_t wavelength) const noexcept {
    return absorption[chromophore * wavelengths_nm.size() + wavelength];
  }
};

/// Non-negative unmixed components, row-major [n_pixels x n_chromophores].
struct UnmixResult {
  ImageGrid grid;
  std::vector<std::string> chromophores;
  std::vector<double> components;

  std::size_t n_pixels() const noexcept { return grid.size(); }
  std::size_t n_chromophores() const noexcept { return chromophores.size(); }
  double at(std::size_t pixel, std::size_t chromophore) const noexcept {
    return components[pixel * chromophores.size() + chromophore];
  }
  Image component_image(std::size_t chromophore) const;
};

} // namespace oatk
