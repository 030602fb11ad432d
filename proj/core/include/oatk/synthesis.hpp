#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oatk/data.hpp"
#include "oatk/filters.hpp"
#include "oatk/geometry.hpp"
#include "oatk/rng.hpp"

namespace oatk {

/// Network input scaling: in-range sinograms land in [-1, 1].
inline constexpr double kPreprocessScale = 1.0 / 450.0;

struct SynthesisConfig {
  /// Acquisition geometry before cropping.
  ArrayGeometry geometry{};
  EirSpec eir{};
  std::size_t image_size = 416;
  double fov_m = 0.0416;
  SosGrid sos_grid{};
  double scale_min = 0.0;
  double scale_max = 450.0;
  std::uint64_t seed = 0;
  /// Standard deviation of additive white noise (after scaling); off when unset.
  std::optional<double> noise_std;
  bool apply_acquisition_filters = true;
  double bandpass_lo_hz = 100e3;
  double bandpass_hi_hz = 12e6;
  std::size_t crop_samples = 110;

  void validate() const;
  ImageGrid grid() const;
};

struct SynthesizedSinogram {
  Sinogram sinogram;
  double sos_used = 0.0;
  double scale_used = 0.0;
};

/// Luminosity grey level 0.2126 R + 0.7152 G + 0.0722 B of a raster on a
/// [0, 1] intensity scale, bilinearly resized to size x size. Row-major.
std::vector<double> raster_luminance(const std::filesystem::path& path, std::size_t size);

/// raster_luminance divided by its maximum (left as is when all zero).
Image image_to_initial_pressure(const std::filesystem::path& path, const SynthesisConfig& config);

/// Draws a grid SoS and a scale from `rng` (in that order), forward-projects
/// p, scales, optionally adds noise, then applies band-pass and crop.
SynthesizedSinogram synthesize_sinogram(const Image& p, const SynthesisConfig& config, Rng& rng);

/// synthesize_sinogram with the item's own stream Rng(config.seed, index).
SynthesizedSinogram synthesize_item(const Image& p, const SynthesisConfig& config,
                                    std::size_t index);

struct TrainingPair {
  Sinogram input;
  Image target;
};

/// input = K s, target = sqrt(K p). Throws invalid_argument on negative target.
TrainingPair preprocess_pair(const Sinogram& s, const Image& target);
/// Inverse of the target transform: x^2 / K.
Image postprocess_image(const Image& x);

/// FNV-1a 64-bit, continuing from `hash`.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept;

struct DatasetSummary {
  std::filesystem::path manifest;
  std::size_t n_items = 0;
  /// Hash over the manifest followed by every listed file.
  std::uint64_t hash = 0;
};

/// Writes item_NNNNN.oasg and item_NNNNN_p0.oaim per source image plus
/// manifest.csv (item,sos,scale,files) into `out_dir`.
DatasetSummary write_dataset(std::span<const Image> sources, const SynthesisConfig& config,
                             const std::filesystem::path& out_dir);

/// Recomputes the hash of a dataset directory from its manifest.
std::uint64_t dataset_hash(const std::filesystem::path& dir);

std::string hex64(std::uint64_t v);

} // namespace oatk
