#include "oatk/delay.hpp"

#include "beamform.hpp"
#include "oatk/error.hpp"
#include "oatk/forward_model.hpp"

namespace oatk {

namespace {

void check_sos(double sos_mps) {
  require(std::isfinite(sos_mps) && sos_mps >= kMinPlausibleSos && sos_mps <= kMaxPlausibleSos,
          ErrorCode::invalid_argument, "delay transform: speed of sound outside 1300-1700 m/s");
}

} // namespace

DelayStack delay_transform_channels(const Sinogram& sinogram, const ImageGrid& grid,
                                    double sos_mps, std::size_t max_elements) {
  check_sos(sos_mps);
  grid.validate();
  const auto& g = sinogram.geometry();
  const std::size_t nt = sinogram.n_time(), nd = sinogram.n_detectors();
  require(nd * grid.size() <= max_elements, ErrorCode::invalid_argument,
          "delay transform: per-channel stack exceeds the element limit");
  const auto channels = detail::channel_major(sinogram);

  DelayStack out{nd, grid, std::vector<float>(nd * grid.size())};
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t di = 0; di < static_cast<std::ptrdiff_t>(nd); ++di) {
    const auto d = static_cast<std::size_t>(di);
    const Point2 det = g.detector_position(d);
    const double* ch = channels.data() + d * nt;
    float* dst = out.values.data() + d * grid.size();
    for (std::size_t row = 0; row < grid.ny; ++row)
      for (std::size_t col = 0; col < grid.nx; ++col) {
        const double pos = g.arrival_bin(distance(grid.pixel_center(row, col), det), sos_mps);
        dst[row * grid.nx + col] = static_cast<float>(detail::sample_linear(ch, nt, pos));
      }
  }
  return out;
}

Image delay_transform_summed(const Sinogram& sinogram, const ImageGrid& grid, double sos_mps) {
  check_sos(sos_mps);
  grid.validate();
  const auto& g = sinogram.geometry();
  const std::size_t nt = sinogram.n_time(), nd = sinogram.n_detectors();
  const auto channels = detail::channel_major(sinogram);
  const auto detectors = g.detector_positions();

  std::vector<double> px(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(grid.ny); ++ri) {
    const auto row = static_cast<std::size_t>(ri);
    for (std::size_t col = 0; col < grid.nx; ++col) {
      const Point2 p = grid.pixel_center(row, col);
      double acc = 0.0;
      for (std::size_t d = 0; d < nd; ++d)
        acc += detail::sample_linear(channels.data() + d * nt, nt,
                                     g.arrival_bin(distance(p, detectors[d]), sos_mps));
      px[row * grid.nx + col] = acc;
    }
  }
  return make_image(grid, px);
}

std::vector<float> one_hot_sos(double sos_mps, const SosGrid& grid) {
  const auto index = grid.index_of(sos_mps);
  require(index.has_value(), ErrorCode::invalid_argument,
          "one-hot: speed of sound is not on the grid");
  std::vector<float> out(grid.size(), 0.0f);
  out[*index] = 1.0f;
  return out;
}

} // namespace oatk
