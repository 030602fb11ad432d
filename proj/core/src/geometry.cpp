#include "oatk/geometry.hpp"

#include <cmath>
#include <numbers>

#include "oatk/error.hpp"

namespace oatk {

double distance(Point2 a, Point2 b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void ArrayGeometry::validate() const {
  require(n_detectors >= 2, ErrorCode::invalid_argument,
          "geometry: n_detectors must be >= 2");
  require(concavity_radius_m > 0.0 && std::isfinite(concavity_radius_m),
          ErrorCode::invalid_argument, "geometry: concavity radius must be > 0");
  require(angular_coverage_deg > 0.0 && angular_coverage_deg <= 360.0,
          ErrorCode::invalid_argument,
          "geometry: angular coverage must lie in (0, 360]");
  require(sampling_rate_hz > 0.0 && std::isfinite(sampling_rate_hz),
          ErrorCode::invalid_argument, "geometry: sampling rate must be > 0");
  require(n_time_samples >= 1, ErrorCode::invalid_argument,
          "geometry: n_time_samples must be >= 1");
  require(std::isfinite(center_of_curvature.x) &&
              std::isfinite(center_of_curvature.y),
          ErrorCode::invalid_argument, "geometry: center must be finite");
}

double ArrayGeometry::detector_angle_rad(std::size_t k) const noexcept {
  const double coverage = angular_coverage_deg * std::numbers::pi / 180.0;
  const double step = coverage / static_cast<double>(n_detectors - 1);
  return -0.5 * coverage + step * static_cast<double>(k);
}

Point2 ArrayGeometry::detector_position(std::size_t k) const noexcept {
  const double theta = detector_angle_rad(k);
  return {center_of_curvature.x + concavity_radius_m * std::sin(theta),
          center_of_curvature.y + concavity_radius_m * std::cos(theta)};
}

std::vector<Point2> ArrayGeometry::detector_positions() const {
  std::vector<Point2> out(n_detectors);
  for (std::size_t k = 0; k < n_detectors; ++k) out[k] = detector_position(k);
  return out;
}

void ImageGrid::validate() const {
  require(nx > 0 && ny > 0, ErrorCode::invalid_argument,
          "image grid: nx and ny must be > 0");
  require(fov_x_m > 0.0 && fov_y_m > 0.0 && std::isfinite(fov_x_m) &&
              std::isfinite(fov_y_m),
          ErrorCode::invalid_argument, "image grid: field of view must be > 0");
}

void SosGrid::validate() const {
  require(step_mps > 0.0 && min_mps > 0.0 && max_mps >= min_mps,
          ErrorCode::invalid_argument, "sos grid: need 0 < min <= max, step > 0");
  const double n = (max_mps - min_mps) / step_mps;
  require(std::abs(n - std::round(n)) < 1e-9, ErrorCode::invalid_argument,
          "sos grid: (max - min) must be divisible by step");
}

std::size_t SosGrid::size() const {
  validate();
  return static_cast<std::size_t>(std::llround((max_mps - min_mps) / step_mps)) + 1;
}

double SosGrid::value(std::size_t index) const {
  require(index < size(), ErrorCode::invalid_argument, "sos grid: index out of range");
  return min_mps + step_mps * static_cast<double>(index);
}

std::vector<double> SosGrid::values() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i);
  return out;
}

std::optional<std::size_t> SosGrid::index_of(double sos_mps) const {
  if (!std::isfinite(sos_mps)) return std::nullopt;
  const double pos = (sos_mps - min_mps) / step_mps;
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) > 1e-9 || rounded < 0.0) return std::nullopt;
  const auto index = static_cast<std::size_t>(rounded);
  if (index >= size()) return std::nullopt;
  return index;
}

} // namespace oatk
