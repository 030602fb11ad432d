#include "oatk/shearlet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "oatk/error.hpp"

namespace oatk {

namespace {

constexpr double kPi = std::numbers::pi;

// Meyer auxiliary function: smooth step from 0 (x <= 0) to 1 (x >= 1) with
// nu(x) + nu(1 - x) = 1.
double meyer_nu(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * x * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

// 1 for r <= c, 0 for r >= 2c.
double radial_lowpass(double r, double c) {
  return std::cos(0.5 * kPi * meyer_nu(r / c - 1.0));
}

// Angular bump centered at 0 with support (-1, 1); squares of unit-shifted
// copies sum to one.
double angular_bump(double x) {
  const double a = std::abs(x);
  return a >= 1.0 ? 0.0 : std::cos(0.5 * kPi * meyer_nu(a));
}

double signed_frequency(std::size_t k, std::size_t n) {
  const auto ki = static_cast<double>(k);
  const auto ni = static_cast<double>(n);
  return (k < (n + 1) / 2 ? ki : ki - ni) / ni;
}

} // namespace

std::size_t ShearletSystem::default_scales(std::size_t ny, std::size_t nx) noexcept {
  const auto m = std::min(ny, nx);
  const int lg = m > 0 ? static_cast<int>(std::floor(std::log2(static_cast<double>(m)))) : 0;
  return static_cast<std::size_t>(std::clamp(lg - 4, 1, 4));
}

std::size_t ShearletSystem::shears_per_cone(std::size_t scale) noexcept {
  const auto k = static_cast<std::size_t>(std::ceil(std::pow(2.0, 0.5 * static_cast<double>(scale)) - 1e-12));
  return 2 * k + 1;
}

ShearletSystem::ShearletSystem(std::size_t ny, std::size_t nx, std::size_t n_scales)
    : ny_(ny), nx_(nx), n_scales_(n_scales == 0 ? default_scales(ny, nx) : n_scales) {
  require(ny >= 8 && nx >= 8, ErrorCode::invalid_argument, "shearlet: image must be at least 8x8");
  require(n_scales_ <= 8, ErrorCode::invalid_argument, "shearlet: at most 8 scales");

  bands_.push_back({-1, -1, 0});
  for (std::size_t j = 0; j < n_scales_; ++j) {
    const int k_max = static_cast<int>(shears_per_cone(j) / 2);
    for (int cone = 0; cone < 2; ++cone)
      for (int k = -k_max; k <= k_max; ++k) bands_.push_back({static_cast<int>(j), cone, k});
  }

  // Raw windows on the full ny x nx grid.
  const std::size_t n_full = ny * nx;
  const std::size_t nf = bands_.size();
  std::vector<double> raw(nf * n_full, 0.0);
  const double c0 = 0.5 / std::pow(2.0, static_cast<double>(n_scales_));
  for (std::size_t ky = 0; ky < ny; ++ky) {
    const double fy = signed_frequency(ky, ny);
    for (std::size_t kx = 0; kx < nx; ++kx) {
      const double fx = signed_frequency(kx, nx);
      const double r = std::max(std::abs(fx), std::abs(fy));
      const std::size_t idx = ky * nx + kx;
      raw[idx] = radial_lowpass(r, c0);
      for (std::size_t f = 1; f < nf; ++f) {
        const auto& b = bands_[f];
        const auto j = static_cast<std::size_t>(b.scale);
        const double c_lo = c0 * std::pow(2.0, static_cast<double>(j));
        const double lo = radial_lowpass(r, c_lo);
        const double hi = j + 1 == n_scales_ ? 1.0 : radial_lowpass(r, 2.0 * c_lo);
        const double radial_sq = hi * hi - lo * lo;
        if (radial_sq <= 0.0) continue;
        // Slope within the cone: fy/fx for the horizontal cone, fx/fy for
        // the vertical one. Windows extend one shear step past the diagonal
        // so the two cones overlap smoothly.
        const double num = b.cone == 0 ? fy : fx;
        const double den = b.cone == 0 ? fx : fy;
        if (den == 0.0) continue;
        const double k_max = static_cast<double>(shears_per_cone(j) / 2);
        const double x = num / den * k_max;
        raw[f * n_full + idx] = std::sqrt(radial_sq) * angular_bump(x - b.shear);
      }
    }
  }

  // Symmetrize under f -> -f so every filter is real and even.
  for (std::size_t f = 0; f < nf; ++f) {
    double* w = raw.data() + f * n_full;
    for (std::size_t ky = 0; ky < ny; ++ky)
      for (std::size_t kx = 0; kx < nx; ++kx) {
        const std::size_t a = ky * nx + kx;
        const std::size_t b = ((ny - ky) % ny) * nx + (nx - kx) % nx;
        if (b <= a) continue;
        const double avg = 0.5 * (w[a] + w[b]);
        w[a] = avg;
        w[b] = avg;
      }
  }

  // Parseval normalization and extraction of the half spectrum.
  const std::size_t hx = nx / 2 + 1;
  filters_.assign(nf * ny * hx, 0.0);
  for (std::size_t ky = 0; ky < ny; ++ky)
    for (std::size_t kx = 0; kx < hx; ++kx) {
      const std::size_t idx = ky * nx + kx;
      double total = 0.0;
      for (std::size_t f = 0; f < nf; ++f) total += raw[f * n_full + idx] * raw[f * n_full + idx];
      require(total > 0.0, ErrorCode::numerical, "shearlet: frame does not cover the spectrum");
      const double scale = 1.0 / std::sqrt(total);
      for (std::size_t f = 0; f < nf; ++f)
        filters_[(f * ny + ky) * hx + kx] = raw[f * n_full + idx] * scale;
    }

  fft_ = std::make_unique<detail::RealFft2D>(ny, nx);
}

ShearletSystem::~ShearletSystem() = default;
ShearletSystem::ShearletSystem(ShearletSystem&&) noexcept = default;
ShearletSystem& ShearletSystem::operator=(ShearletSystem&&) noexcept = default;

std::span<const double> ShearletSystem::filter(std::size_t f) const {
  const std::size_t half = ny_ * (nx_ / 2 + 1);
  return {filters_.data() + f * half, half};
}

ShearletCoeffs ShearletSystem::analysis(std::span<const double> image) const {
  require(fft_ != nullptr, ErrorCode::invalid_argument, "shearlet: system not initialized");
  require(image.size() == ny_ * nx_, ErrorCode::dimension_mismatch,
          "shearlet: image size does not match the system");
  const std::size_t n = ny_ * nx_, half = fft_->half_size();
  std::vector<std::complex<double>> spec(half), work(half);
  fft_->forward(image, spec);

  ShearletCoeffs out{n_filters(), ny_, nx_, std::vector<double>(n_filters() * n)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t f = 0; f < n_filters(); ++f) {
    const auto w = filter(f);
    for (std::size_t i = 0; i < half; ++i) work[i] = spec[i] * (w[i] * inv_n);
    fft_->inverse(work, out.band(f));
  }
  return out;
}

void ShearletSystem::synthesis(const ShearletCoeffs& coeffs, std::span<double> image) const {
  require(fft_ != nullptr, ErrorCode::invalid_argument, "shearlet: system not initialized");
  require(coeffs.n_filters == n_filters() && coeffs.ny == ny_ && coeffs.nx == nx_ &&
              coeffs.values.size() == n_filters() * ny_ * nx_ && image.size() == ny_ * nx_,
          ErrorCode::dimension_mismatch, "shearlet: coefficient layout does not match the system");
  const std::size_t n = ny_ * nx_, half = fft_->half_size();
  std::vector<std::complex<double>> acc(half, 0.0), work(half);
  for (std::size_t f = 0; f < n_filters(); ++f) {
    fft_->forward(coeffs.band(f), work);
    const auto w = filter(f);
    for (std::size_t i = 0; i < half; ++i) acc[i] += work[i] * w[i];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : acc) v *= inv_n;
  fft_->inverse(acc, image);
}

ShearletCoeffs ShearletSystem::analysis(const Image& image) const {
  const auto x = to_double(image.pixels());
  require(image.ny() == ny_ && image.nx() == nx_, ErrorCode::dimension_mismatch,
          "shearlet: image size does not match the system");
  return analysis(std::span<const double>(x));
}

Image ShearletSystem::synthesis(const ShearletCoeffs& coeffs, const ImageGrid& grid) const {
  require(grid.ny == ny_ && grid.nx == nx_, ErrorCode::dimension_mismatch,
          "shearlet: grid does not match the system");
  std::vector<double> x(ny_ * nx_);
  synthesis(coeffs, x);
  return make_image(grid, x);
}

std::string ShearletSystem::describe() const {
  std::ostringstream os;
  os << "shearlet system " << ny_ << "x" << nx_ << ": " << n_scales_ << " scales, "
     << n_filters() << " filters (1 low-pass";
  for (std::size_t j = 0; j < n_scales_; ++j)
    os << ", scale " << j << ": 2x" << shears_per_cone(j);
  os << ")";
  return os.str();
}

void soft_threshold(std::span<double> coeffs, double threshold) {
  require(threshold >= 0.0 && !std::isnan(threshold), ErrorCode::invalid_argument,
          "soft threshold: threshold must be >= 0");
  for (auto& c : coeffs) {
    const double mag = std::abs(c) - threshold;
    c = mag > 0.0 ? std::copysign(mag, c) : 0.0;
  }
}

ShearletCoeffs soft_threshold(ShearletCoeffs coeffs, double threshold) {
  soft_threshold(coeffs.values, threshold);
  return coeffs;
}

double l1_norm(const ShearletCoeffs& coeffs) noexcept {
  double s = 0.0;
  for (double c : coeffs.values) s += std::abs(c);
  return s;
}

} // namespace oatk
