#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace oatk {

/// Planar position in meters. x grows to the right, y grows upward; the
/// image center sits at the origin.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b) noexcept;

/// Concave detector arc plus the sampling clock.
///
/// Detector k sits at angle theta_k, spaced uniformly over
/// [-coverage/2, +coverage/2] and measured from the upward vertical, at
/// center + R * (sin theta_k, cos theta_k). With the default center at the
/// image center, the arc lies above the field of view and opens downward.
///
/// Sample n of a channel was recorded at time (n + t0_offset_samples) / fs
/// after the excitation pulse.
struct ArrayGeometry {
  std::size_t n_detectors = 256;
  double concavity_radius_m = 0.04;
  double angular_coverage_deg = 125.0;
  Point2 center_of_curvature{};
  double sampling_rate_hz = 40e6;
  std::size_t n_time_samples = 2030;
  std::size_t t0_offset_samples = 0;

  void validate() const;

  double sampling_interval_s() const noexcept { return 1.0 / sampling_rate_hz; }
  double detector_angle_rad(std::size_t k) const noexcept;
  Point2 detector_position(std::size_t k) const noexcept;
  std::vector<Point2> detector_positions() const;

  /// Fractional sample index (relative to the first stored sample) at which
  /// a wave travelling `distance_m` at `sos_mps` arrives.
  double arrival_bin(double distance_m, double sos_mps) const noexcept {
    return distance_m / sos_mps * sampling_rate_hz -
           static_cast<double>(t0_offset_samples);
  }

  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

/// Square-pixel raster placement. Row 0 is the top row (largest y).
struct ImageGrid {
  std::size_t nx = 416;
  std::size_t ny = 416;
  double fov_x_m = 0.0416;
  double fov_y_m = 0.0416;

  void validate() const;

  std::size_t size() const noexcept { return nx * ny; }
  double pitch_x() const noexcept { return fov_x_m / static_cast<double>(nx); }
  double pitch_y() const noexcept { return fov_y_m / static_cast<double>(ny); }
  double pixel_x(std::size_t col) const noexcept {
    return -0.5 * fov_x_m + (static_cast<double>(col) + 0.5) * pitch_x();
  }
  double pixel_y(std::size_t row) const noexcept {
    return 0.5 * fov_y_m - (static_cast<double>(row) + 0.5) * pitch_y();
  }
  Point2 pixel_center(std::size_t row, std::size_t col) const noexcept {
    return {pixel_x(col), pixel_y(row)};
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

/// Discrete set of supported speed-of-sound values.
struct SosGrid {
  double min_mps = 1475.0;
  double max_mps = 1525.0;
  double step_mps = 5.0;

  void validate() const;
  std::size_t size() const;
  double value(std::size_t index) const;
  std::vector<double> values() const;
  /// Grid index of `sos_mps`, or nullopt when it is off the grid.
  std::optional<std::size_t> index_of(double sos_mps) const;
  bool contains(double sos_mps) const { return index_of(sos_mps).has_value(); }
};

} // namespace oatk
