#include "oatk/data.hpp"

#include <algorithm>
#include <cmath>

#include "oatk/error.hpp"

namespace oatk {

namespace {

bool all_finite(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

} // namespace

Sinogram::Sinogram(ArrayGeometry geometry)
    : geometry_(geometry),
      samples_(geometry.n_time_samples * geometry.n_detectors, 0.0f) {
  geometry_.validate();
}

Sinogram::Sinogram(ArrayGeometry geometry, std::vector<float> samples,
                   std::optional<double> wavelength_nm)
    : geometry_(geometry), samples_(std::move(samples)), wavelength_nm_(wavelength_nm) {
  geometry_.validate();
  require(samples_.size() == geometry_.n_time_samples * geometry_.n_detectors,
          ErrorCode::dimension_mismatch,
          "sinogram: sample count does not match geometry");
  require(all_finite(samples_), ErrorCode::non_finite, "sinogram: non-finite sample");
}

std::vector<double> Sinogram::channel(std::size_t d) const {
  std::vector<double> out(n_time());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = at(t, d);
  return out;
}

Image::Image(ImageGrid grid) : grid_(grid), pixels_(grid.size(), 0.0f) {
  grid_.validate();
}

Image::Image(ImageGrid grid, std::vector<float> pixels)
    : grid_(grid), pixels_(std::move(pixels)) {
  grid_.validate();
  require(pixels_.size() == grid_.size(), ErrorCode::dimension_mismatch,
          "image: pixel count does not match grid");
  require(all_finite(pixels_), ErrorCode::non_finite, "image: non-finite pixel");
}

std::vector<double> to_double(std::span<const float> values) {
  return {values.begin(), values.end()};
}

std::vector<float> to_float(std::span<const double> values) {
  std::vector<float> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [](double x) { return static_cast<float>(x); });
  return out;
}

Sinogram make_sinogram(const ArrayGeometry& geometry, std::span<const double> samples) {
  return Sinogram(geometry, to_float(samples));
}

Image make_image(const ImageGrid& grid, std::span<const double> pixels) {
  return Image(grid, to_float(pixels));
}

Image clamp_negatives(const Image& image) {
  std::vector<float> px(image.pixels().begin(), image.pixels().end());
  for (auto& v : px) v = std::max(v, 0.0f);
  return Image(image.grid(), std::move(px));
}

void MultispectralStack::validate() const {
  require(!images.empty(), ErrorCode::invalid_argument, "stack: no images");
  require(images.size() == wavelengths_nm.size(), ErrorCode::dimension_mismatch,
          "stack: image and wavelength counts differ");
  for (const auto& im : images)
    require(im.grid() == images.front().grid(), ErrorCode::dimension_mismatch,
            "stack: images have different grids");
  for (std::size_t i = 1; i < wavelengths_nm.size(); ++i)
    require(wavelengths_nm[i] > wavelengths_nm[i - 1], ErrorCode::invalid_argument,
            "stack: wavelengths must be strictly increasing");
}

std::vector<double> default_wavelengths_nm() {
  std::vector<double> out;
  for (int wl = 700; wl <= 980; wl += 10) out.push_back(wl);
  return out;
}

void SpectraMatrix::validate() const {
  require(!chromophores.empty() && !wavelengths_nm.empty(),
          ErrorCode::invalid_argument, "spectra: empty matrix");
  require(absorption.size() == chromophores.size() * wavelengths_nm.size(),
          ErrorCode::dimension_mismatch, "spectra: matrix size mismatch");
  for (double a : absorption) {
    require(std::isfinite(a), ErrorCode::non_finite, "spectra: non-finite absorption");
    require(a >= 0.0, ErrorCode::invalid_argument, "spectra: negative absorption");
  }
  for (std::size_t c = 0; c < n_chromophores(); ++c) {
    bool nonzero = false;
    for (std::size_t w = 0; w < n_wavelengths(); ++w) nonzero |= at(c, w) > 0.0;
    require(nonzero, ErrorCode::invalid_argument,
            "spectra: chromophore '" + chromophores[c] + "' has an all-zero spectrum");
  }
  for (std::size_t i = 1; i < wavelengths_nm.size(); ++i)
    require(wavelengths_nm[i] > wavelengths_nm[i - 1], ErrorCode::invalid_argument,
            "spectra: wavelengths must be strictly increasing");
}

Image UnmixResult::component_image(std::size_t chromophore) const {
  require(chromophore < n_chromophores(), ErrorCode::invalid_argument,
          "unmix: chromophore index out of range");
  std::vector<float> px(n_pixels());
  for (std::size_t p = 0; p < px.size(); ++p)
    px[p] = static_cast<float>(at(p, chromophore));
  return Image(grid, std::move(px));
}

} // namespace oatk
