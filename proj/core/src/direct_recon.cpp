#include "oatk/direct_recon.hpp"

#include <cmath>
#include <vector>

#include "beamform.hpp"
#include "oatk/error.hpp"
#include "oatk/forward_model.hpp"

namespace oatk {

namespace {

void check_inputs(const Sinogram& sinogram, const ImageGrid& grid, double sos_mps) {
  require(std::isfinite(sos_mps) && sos_mps >= kMinPlausibleSos && sos_mps <= kMaxPlausibleSos,
          ErrorCode::invalid_argument, "direct recon: speed of sound outside 1300-1700 m/s");
  require(sinogram.n_time() >= 2 && sinogram.n_detectors() >= 2,
          ErrorCode::dimension_mismatch, "direct recon: sinogram too small");
  grid.validate();
}

} // namespace

Image backproject(const Sinogram& sinogram, const ImageGrid& grid, double sos_mps) {
  check_inputs(sinogram, grid, sos_mps);
  const auto& g = sinogram.geometry();
  const std::size_t nt = sinogram.n_time(), nd = sinogram.n_detectors();
  const auto p = detail::channel_major(sinogram);

  // b(t) = 2 p(t) - 2 t p'(t). With t = (n + t0) / fs and p' in per-second
  // units the sampling rate cancels.
  std::vector<double> b(p.size());
  const auto t0 = static_cast<double>(g.t0_offset_samples);
  for (std::size_t d = 0; d < nd; ++d) {
    const double* ch = p.data() + d * nt;
    double* out = b.data() + d * nt;
    for (std::size_t n = 0; n < nt; ++n) {
      double dp;
      if (n == 0) dp = ch[1] - ch[0];
      else if (n + 1 == nt) dp = ch[n] - ch[n - 1];
      else dp = 0.5 * (ch[n + 1] - ch[n - 1]);
      out[n] = 2.0 * ch[n] - 2.0 * (static_cast<double>(n) + t0) * dp;
    }
  }

  const auto detectors = g.detector_positions();
  const double weight = 1.0 / static_cast<double>(nd);
  std::vector<double> px(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(grid.ny); ++ri) {
    const auto row = static_cast<std::size_t>(ri);
    for (std::size_t col = 0; col < grid.nx; ++col) {
      const Point2 q = grid.pixel_center(row, col);
      double acc = 0.0;
      for (std::size_t d = 0; d < nd; ++d)
        acc += detail::sample_linear(b.data() + d * nt, nt,
                                     g.arrival_bin(distance(q, detectors[d]), sos_mps));
      px[row * grid.nx + col] = weight * acc;
    }
  }
  return make_image(grid, px);
}

DmasCfValue dmas_cf_combine(std::span<const double> delayed) {
  // sum_{i<j} u_i u_j = ((sum u)^2 - sum u^2) / 2 with u = sign(s) sqrt|s|.
  double sum_u = 0.0, sum_abs = 0.0, sum = 0.0, sum_sq = 0.0;
  for (double s : delayed) {
    const double u = std::copysign(std::sqrt(std::abs(s)), s);
    sum_u += u;
    sum_abs += std::abs(s);
    sum += s;
    sum_sq += s * s;
  }
  DmasCfValue out;
  out.dmas = 0.5 * (sum_u * sum_u - sum_abs);
  out.cf = sum_sq > 0.0 ? (sum * sum) / (static_cast<double>(delayed.size()) * sum_sq) : 0.0;
  out.value = out.dmas * out.cf;
  return out;
}

Image dmas_cf(const Sinogram& sinogram, const ImageGrid& grid, double sos_mps) {
  check_inputs(sinogram, grid, sos_mps);
  const auto& g = sinogram.geometry();
  const std::size_t nt = sinogram.n_time(), nd = sinogram.n_detectors();
  const auto channels = detail::channel_major(sinogram);
  const auto detectors = g.detector_positions();

  std::vector<double> px(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(grid.ny); ++ri) {
    const auto row = static_cast<std::size_t>(ri);
    std::vector<double> delayed(nd);
    for (std::size_t col = 0; col < grid.nx; ++col) {
      const Point2 q = grid.pixel_center(row, col);
      for (std::size_t d = 0; d < nd; ++d)
        delayed[d] = detail::sample_linear(channels.data() + d * nt, nt,
                                           g.arrival_bin(distance(q, detectors[d]), sos_mps));
      px[row * grid.nx + col] = dmas_cf_combine(delayed).value;
    }
  }
  return make_image(grid, px);
}

Image reconstruct_direct(const Sinogram& sinogram, const ImageGrid& grid,
                         const DirectReconConfig& config) {
  Image out = config.method == DirectMethod::bp
                  ? backproject(sinogram, grid, config.sos_mps)
                  : dmas_cf(sinogram, grid, config.sos_mps);
  return config.clamp_negatives ? clamp_negatives(out) : out;
}

std::string_view to_string(DirectMethod method) noexcept {
  return method == DirectMethod::bp ? "bp" : "dmas";
}

} // namespace oatk
