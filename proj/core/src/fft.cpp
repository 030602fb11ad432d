#include "fft.hpp"

#include <mutex>
#include <vector>

#include "oatk/error.hpp"

namespace oatk::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

} // namespace

FftwPlan& FftwPlan::operator=(FftwPlan&& other) noexcept {
  if (this != &other) {
    reset();
    plan_ = other.plan_;
    other.plan_ = nullptr;
  }
  return *this;
}

FftwPlan::~FftwPlan() { reset(); }

void FftwPlan::reset() noexcept {
  if (plan_) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    plan_ = nullptr;
  }
}

RealFft2D::RealFft2D(std::size_t ny, std::size_t nx) : ny_(ny), nx_(nx) {
  require(ny > 0 && nx > 0, ErrorCode::invalid_argument, "fft: empty size");
  std::vector<double> real(ny * nx);
  std::vector<std::complex<double>> spec(half_size());
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  std::lock_guard lock(planner_mutex());
  fwd_ = FftwPlan(fftw_plan_dft_r2c_2d(static_cast<int>(ny), static_cast<int>(nx),
                                       real.data(), c, kPlanFlags));
  inv_ = FftwPlan(fftw_plan_dft_c2r_2d(static_cast<int>(ny), static_cast<int>(nx), c,
                                       real.data(), kPlanFlags));
  require(fwd_.get() && inv_.get(), ErrorCode::numerical, "fft: planning failed");
}

void RealFft2D::forward(std::span<const double> in,
                        std::span<std::complex<double>> out) const {
  // r2c does not modify its input for out-of-place transforms.
  fftw_execute_dft_r2c(fwd_.get(), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft2D::inverse(std::span<std::complex<double>> in, std::span<double> out) const {
  fftw_execute_dft_c2r(inv_.get(), reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

Dct1D::Dct1D(std::size_t n) : n_(n) {
  require(n > 0, ErrorCode::invalid_argument, "dct: empty size");
  std::vector<double> a(n), b(n);
  std::lock_guard lock(planner_mutex());
  fwd_ = FftwPlan(fftw_plan_r2r_1d(static_cast<int>(n), a.data(), b.data(), FFTW_REDFT10,
                                   kPlanFlags));
  inv_ = FftwPlan(fftw_plan_r2r_1d(static_cast<int>(n), a.data(), b.data(), FFTW_REDFT01,
                                   kPlanFlags));
  require(fwd_.get() && inv_.get(), ErrorCode::numerical, "dct: planning failed");
}

void Dct1D::forward(std::span<double> in, std::span<double> out) const {
  fftw_execute_r2r(fwd_.get(), in.data(), out.data());
}

void Dct1D::inverse(std::span<double> in, std::span<double> out) const {
  fftw_execute_r2r(inv_.get(), in.data(), out.data());
}

} // namespace oatk::detail
