#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include <fftw3.h>

namespace oatk::detail {

/// Owning wrapper for an FFTW plan. Plans are created under a process-wide
/// lock (the FFTW planner is not thread-safe) with FFTW_UNALIGNED, so a
/// single plan can execute concurrently on caller-provided buffers.
class FftwPlan {
public:
  FftwPlan() = default;
  explicit FftwPlan(fftw_plan plan) : plan_(plan) {}
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  FftwPlan(FftwPlan&& other) noexcept : plan_(other.plan_) { other.plan_ = nullptr; }
  FftwPlan& operator=(FftwPlan&& other) noexcept;
  ~FftwPlan();

  fftw_plan get() const noexcept { return plan_; }

private:
  void reset() noexcept;

  fftw_plan plan_ = nullptr;
};

/// Real 2-D transform of an ny x nx row-major raster to its ny x (nx/2+1)
/// half spectrum and back. The inverse is unnormalized and overwrites its
/// input.
class RealFft2D {
public:
  RealFft2D(std::size_t ny, std::size_t nx);

  std::size_t ny() const noexcept { return ny_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t half_size() const noexcept { return ny_ * (nx_ / 2 + 1); }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  void inverse(std::span<std::complex<double>> in, std::span<double> out) const;

private:
  std::size_t ny_, nx_;
  FftwPlan fwd_, inv_;
};

/// DCT-II / DCT-III pair of length n (FFTW REDFT10 / REDFT01). Applying
/// both in sequence multiplies by 2n.
class Dct1D {
public:
  explicit Dct1D(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<double> in, std::span<double> out) const;
  void inverse(std::span<double> in, std::span<double> out) const;

private:
  std::size_t n_;
  FftwPlan fwd_, inv_;
};

} // namespace oatk::detail
