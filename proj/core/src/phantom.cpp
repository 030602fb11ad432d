#include "oatk/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "oatk/error.hpp"

namespace oatk {

namespace {

void paint_disk(std::vector<float>& px, const ImageGrid& g, double cy, double cx, double r,
                float value) {
  for (std::size_t row = 0; row < g.ny; ++row)
    for (std::size_t col = 0; col < g.nx; ++col) {
      const double dy = static_cast<double>(row) + 0.5 - cy;
      const double dx = static_cast<double>(col) + 0.5 - cx;
      if (dy * dy + dx * dx <= r * r) px[row * g.nx + col] = value;
    }
}

} // namespace

PhantomKind parse_phantom_kind(std::string_view name) {
  if (name == "disks") return PhantomKind::disks;
  if (name == "points") return PhantomKind::points;
  if (name == "cartoon") return PhantomKind::cartoon;
  fail(ErrorCode::invalid_argument, "phantom: unsupported kind '" + std::string(name) + "'");
}

std::string_view to_string(PhantomKind kind) noexcept {
  switch (kind) {
  case PhantomKind::disks: return "disks";
  case PhantomKind::points: return "points";
  case PhantomKind::cartoon: return "cartoon";
  }
  return "?";
}

Image make_phantom(PhantomKind kind, const ImageGrid& grid, Rng& rng, std::size_t count) {
  grid.validate();
  require(grid.nx >= 32 && grid.ny >= 32, ErrorCode::invalid_argument,
          "phantom: image must be at least 32x32");
  const auto ny = static_cast<double>(grid.ny), nx = static_cast<double>(grid.nx);
  const double side = std::min(ny, nx);
  std::vector<float> px(grid.size(), 0.0f);

  switch (kind) {
  case PhantomKind::disks: {
    const std::size_t n = count == 0 ? 3 : count;
    for (std::size_t i = 0; i < n; ++i) {
      const double cy = rng.uniform(0.2, 0.8) * ny;
      const double cx = rng.uniform(0.2, 0.8) * nx;
      const double r = rng.uniform(0.05, 0.15) * side;
      const auto amp = static_cast<float>(rng.uniform(0.5, 1.0));
      paint_disk(px, grid, cy, cx, r, amp);
    }
    break;
  }
  case PhantomKind::points: {
    const std::size_t n = count == 0 ? 1 : count;
    const std::size_t r0 = grid.ny / 4, c0 = grid.nx / 4;
    const std::size_t rows = grid.ny / 2, cols = grid.nx / 2;
    require(n <= rows * cols, ErrorCode::invalid_argument, "phantom: too many points");
    std::set<std::size_t> used;
    while (used.size() < n) {
      const std::size_t idx = (r0 + rng.index(rows)) * grid.nx + c0 + rng.index(cols);
      if (used.insert(idx).second) px[idx] = 1.0f;
    }
    break;
  }
  case PhantomKind::cartoon: {
    const std::size_t n = count == 0 ? 4 : count;
    const double ay = 0.4 * ny, ax = 0.45 * nx;
    for (std::size_t row = 0; row < grid.ny; ++row)
      for (std::size_t col = 0; col < grid.nx; ++col) {
        const double dy = (static_cast<double>(row) + 0.5 - 0.5 * ny) / ay;
        const double dx = (static_cast<double>(col) + 0.5 - 0.5 * nx) / ax;
        if (dy * dy + dx * dx <= 1.0) px[row * grid.nx + col] = 0.3f;
      }
    for (std::size_t i = 0; i < n; ++i) {
      const auto amp = static_cast<float>(rng.uniform(0.6, 1.0));
      const double cy = rng.uniform(0.3, 0.7) * ny;
      const double cx = rng.uniform(0.3, 0.7) * nx;
      if (rng.uniform() < 0.5) {
        paint_disk(px, grid, cy, cx, rng.uniform(0.04, 0.1) * side, amp);
      } else {
        const double hy = rng.uniform(0.03, 0.1) * ny, hx = rng.uniform(0.03, 0.1) * nx;
        for (std::size_t row = 0; row < grid.ny; ++row)
          for (std::size_t col = 0; col < grid.nx; ++col)
            if (std::abs(static_cast<double>(row) + 0.5 - cy) <= hy &&
                std::abs(static_cast<double>(col) + 0.5 - cx) <= hx)
              px[row * grid.nx + col] = amp;
      }
    }
    break;
  }
  }
  return Image(grid, std::move(px));
}

} // namespace oatk
