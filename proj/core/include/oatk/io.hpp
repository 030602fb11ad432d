#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "oatk/data.hpp"

namespace oatk::io {

/// Sinogram file ("OASG"): magic, u32 version = 1, u32 n_time, u32 n_det,
/// f32 t0_offset_s, f32 sampling_rate_hz, then n_time * n_det f32 samples,
/// time-major. All fields little-endian.
///
/// The header only carries the sampling description; the arc itself
/// (radius, coverage, center) is taken from `arc`.
Sinogram read_sinogram(const std::filesystem::path& path, const ArrayGeometry& arc = {});
void write_sinogram(const Sinogram& sinogram, const std::filesystem::path& path);
Sinogram decode_sinogram(std::span<const std::uint8_t> bytes, const ArrayGeometry& arc = {});
std::vector<std::uint8_t> encode_sinogram(const Sinogram& sinogram);

/// Image file ("OAIM"): magic, u32 version = 1, u32 nx, u32 ny, f32 fov_x_m,
/// f32 fov_y_m, then ny * nx f32 pixels, row-major from the top row.
Image read_image(const std::filesystem::path& path);
void write_image(const Image& image, const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_image(const Image& image);

/// Spectra CSV: header "wavelength_nm,<chromophore names...>", then one row
/// per wavelength.
SpectraMatrix read_spectra(const std::filesystem::path& path);
SpectraMatrix parse_spectra(std::string_view csv);
void write_spectra(const SpectraMatrix& spectra, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace oatk::io
