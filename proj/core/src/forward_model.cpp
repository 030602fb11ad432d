#include "oatk/forward_model.hpp"

#include <cmath>
#include <limits>

#include "oatk/error.hpp"

namespace oatk {

namespace {

bool same_fov(double a, double b) { return std::abs(a - b) <= 1e-6 * std::max(a, b); }

} // namespace

ForwardOperator::ForwardOperator(ArrayGeometry geometry, ImageGrid grid, double sos_mps,
                                 EirSpec eir)
    : geometry_(geometry), grid_(grid), sos_mps_(sos_mps), eir_(eir) {
  geometry_.validate();
  grid_.validate();
  require(std::isfinite(sos_mps) && sos_mps >= kMinPlausibleSos && sos_mps <= kMaxPlausibleSos,
          ErrorCode::invalid_argument, "forward model: speed of sound outside 1300-1700 m/s");
  kernel_ = convolve(derivative_kernel(), eir_kernel(eir_, geometry_.sampling_rate_hz));
  detectors_ = geometry_.detector_positions();
  min_dist_ = std::max(grid_.pitch_x(), grid_.pitch_y());
}

ForwardOperator ForwardOperator::with_sos(double sos_mps) const {
  return ForwardOperator(geometry_, grid_, sos_mps, eir_);
}

void ForwardOperator::apply(std::span<const double> image, std::span<double> sinogram) const {
  require(image.size() == image_size() && sinogram.size() == sinogram_size(),
          ErrorCode::dimension_mismatch, "forward model: buffer size mismatch");
  const std::size_t nt = geometry_.n_time_samples, nd = geometry_.n_detectors;
  const std::size_t nx = grid_.nx, ny = grid_.ny;
  const auto half = static_cast<std::ptrdiff_t>(kernel_.half());
  const auto ext_len = static_cast<std::ptrdiff_t>(nt) + 2 * half;
  const double bins_per_meter = geometry_.sampling_rate_hz / sos_mps_;
  const double bin_offset = static_cast<double>(half) - static_cast<double>(geometry_.t0_offset_samples);
  const double* taps = kernel_.taps.data() + half;

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t di = 0; di < static_cast<std::ptrdiff_t>(nd); ++di) {
    const auto d = static_cast<std::size_t>(di);
    const Point2 det = detectors_[d];
    std::vector<double> buf(static_cast<std::size_t>(ext_len), 0.0);
    std::ptrdiff_t lo = ext_len, hi = -1;

    for (std::size_t row = 0; row < ny; ++row) {
      const double dy = grid_.pixel_y(row) - det.y;
      const double* line = image.data() + row * nx;
      for (std::size_t col = 0; col < nx; ++col) {
        const double v = line[col];
        if (v == 0.0) continue;
        const double dx = grid_.pixel_x(col) - det.x;
        const double dist = std::sqrt(dx * dx + dy * dy);
        const double pos = dist * bins_per_meter + bin_offset;
        const double base = std::floor(pos);
        const double frac = pos - base;
        const auto i0 = static_cast<std::ptrdiff_t>(base);
        const double w = v * pixel_weight(dist);
        if (i0 >= 0 && i0 < ext_len) {
          buf[static_cast<std::size_t>(i0)] += w * (1.0 - frac);
          lo = std::min(lo, i0);
          hi = std::max(hi, i0);
        }
        if (i0 + 1 >= 0 && i0 + 1 < ext_len) {
          buf[static_cast<std::size_t>(i0 + 1)] += w * frac;
          lo = std::min(lo, i0 + 1);
          hi = std::max(hi, i0 + 1);
        }
      }
    }

    // Output n reads buf[n + half - m] for m in [-half, half].
    for (std::size_t t = 0; t < nt; ++t) sinogram[t * nd + d] = 0.0;
    if (hi < lo) continue;
    const std::ptrdiff_t n_begin = std::max<std::ptrdiff_t>(0, lo - 2 * half);
    const std::ptrdiff_t n_end = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(nt), hi + 1);
    for (std::ptrdiff_t n = n_begin; n < n_end; ++n) {
      const std::ptrdiff_t m_lo = std::max(-half, n + half - hi);
      const std::ptrdiff_t m_hi = std::min(half, n + half - lo);
      double acc = 0.0;
      for (std::ptrdiff_t m = m_lo; m <= m_hi; ++m)
        acc += taps[m] * buf[static_cast<std::size_t>(n + half - m)];
      sinogram[static_cast<std::size_t>(n) * nd + d] = acc;
    }
  }
}

void ForwardOperator::adjoint(std::span<const double> sinogram, std::span<double> image) const {
  require(image.size() == image_size() && sinogram.size() == sinogram_size(),
          ErrorCode::dimension_mismatch, "adjoint model: buffer size mismatch");
  const std::size_t nt = geometry_.n_time_samples, nd = geometry_.n_detectors;
  const std::size_t nx = grid_.nx, ny = grid_.ny;
  const auto half = static_cast<std::ptrdiff_t>(kernel_.half());
  const auto ext_len = static_cast<std::ptrdiff_t>(nt) + 2 * half;
  const double bins_per_meter = geometry_.sampling_rate_hz / sos_mps_;
  const double bin_offset = static_cast<double>(half) - static_cast<double>(geometry_.t0_offset_samples);
  const double* taps = kernel_.taps.data() + half;

  // Correlate each channel with the kernel onto the padded axis:
  // ext[q] = sum_m k[m] y[q - half + m].
  std::vector<double> ext(nd * static_cast<std::size_t>(ext_len), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t di = 0; di < static_cast<std::ptrdiff_t>(nd); ++di) {
    const auto d = static_cast<std::size_t>(di);
    double* out = ext.data() + d * static_cast<std::size_t>(ext_len);
    for (std::ptrdiff_t q = 0; q < ext_len; ++q) {
      const std::ptrdiff_t m_lo = std::max(-half, half - q);
      const std::ptrdiff_t m_hi = std::min(half, static_cast<std::ptrdiff_t>(nt) - 1 - q + half);
      double acc = 0.0;
      for (std::ptrdiff_t m = m_lo; m <= m_hi; ++m)
        acc += taps[m] * sinogram[static_cast<std::size_t>(q - half + m) * nd + d];
      out[q] = acc;
    }
  }

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(ny); ++ri) {
    const auto row = static_cast<std::size_t>(ri);
    const double y = grid_.pixel_y(row);
    for (std::size_t col = 0; col < nx; ++col) {
      const double x = grid_.pixel_x(col);
      double acc = 0.0;
      for (std::size_t d = 0; d < nd; ++d) {
        const double dx = x - detectors_[d].x, dy = y - detectors_[d].y;
        const double dist = std::sqrt(dx * dx + dy * dy);
        const double pos = dist * bins_per_meter + bin_offset;
        const double base = std::floor(pos);
        const double frac = pos - base;
        const auto i0 = static_cast<std::ptrdiff_t>(base);
        const double* e = ext.data() + d * static_cast<std::size_t>(ext_len);
        double v = 0.0;
        if (i0 >= 0 && i0 < ext_len) v += (1.0 - frac) * e[i0];
        if (i0 + 1 >= 0 && i0 + 1 < ext_len) v += frac * e[i0 + 1];
        acc += v * pixel_weight(dist);
      }
      image[row * nx + col] = acc;
    }
  }
}

std::vector<double> ForwardOperator::apply(std::span<const double> image) const {
  std::vector<double> out(sinogram_size());
  apply(image, out);
  return out;
}

std::vector<double> ForwardOperator::adjoint(std::span<const double> sinogram) const {
  std::vector<double> out(image_size());
  adjoint(sinogram, out);
  return out;
}

void ForwardOperator::check_image(const Image& image) const {
  const auto& g = image.grid();
  require(g.nx == grid_.nx && g.ny == grid_.ny && same_fov(g.fov_x_m, grid_.fov_x_m) &&
              same_fov(g.fov_y_m, grid_.fov_y_m),
          ErrorCode::dimension_mismatch, "image grid does not match the operator");
}

void ForwardOperator::check_sinogram(const Sinogram& sinogram) const {
  const auto& g = sinogram.geometry();
  require(g.n_time_samples == geometry_.n_time_samples &&
              g.n_detectors == geometry_.n_detectors &&
              g.t0_offset_samples == geometry_.t0_offset_samples &&
              std::abs(g.sampling_rate_hz - geometry_.sampling_rate_hz) <=
                  1e-6 * geometry_.sampling_rate_hz,
          ErrorCode::dimension_mismatch, "sinogram does not match the operator geometry");
}

Sinogram forward_apply(const ForwardOperator& op, const Image& image) {
  op.check_image(image);
  const auto x = to_double(image.pixels());
  return make_sinogram(op.geometry(), op.apply(x));
}

Image adjoint_apply(const ForwardOperator& op, const Sinogram& sinogram) {
  op.check_sinogram(sinogram);
  const auto y = to_double(sinogram.samples());
  return make_image(op.grid(), op.adjoint(y));
}

std::size_t ReachMask::count() const noexcept {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

void ReachMask::apply(std::span<double> sinogram) const {
  require(sinogram.size() == bits_.size(), ErrorCode::dimension_mismatch,
          "reach mask: size mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (!bits_[i]) sinogram[i] = 0.0;
}

ReachMask reach_mask(const ForwardOperator& op) {
  const auto& g = op.geometry();
  const auto& grid = op.grid();
  const auto half = static_cast<double>(op.kernel().half());
  ReachMask mask(g.n_time_samples, g.n_detectors);
  for (std::size_t d = 0; d < g.n_detectors; ++d) {
    const Point2 det = g.detector_position(d);
    double d_min = std::numeric_limits<double>::infinity(), d_max = 0.0;
    for (std::size_t row = 0; row < grid.ny; ++row)
      for (std::size_t col = 0; col < grid.nx; ++col) {
        const double dist = distance(grid.pixel_center(row, col), det);
        d_min = std::min(d_min, dist);
        d_max = std::max(d_max, dist);
      }
    const double first = std::floor(g.arrival_bin(d_min, op.sos_mps())) - half;
    const double last = std::floor(g.arrival_bin(d_max, op.sos_mps())) + 1.0 + half;
    const double top = static_cast<double>(g.n_time_samples) - 1.0;
    if (last < 0.0 || first > top) continue;
    const auto t_begin = static_cast<std::size_t>(std::max(first, 0.0));
    const auto t_end = static_cast<std::size_t>(std::min(last, top));
    for (std::size_t t = t_begin; t <= t_end; ++t) mask.set(t, d, true);
  }
  return mask;
}

} // namespace oatk
