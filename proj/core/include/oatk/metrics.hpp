#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "oatk/data.hpp"
#include "oatk/forward_model.hpp"

namespace oatk {

/// Closed-form minimizer of ||alpha * mp - s||^2: <mp, s> / ||mp||^2.
/// Throws degenerate when mp is identically zero.
double optimal_scale(std::span<const double> mp, std::span<const double> s);
double optimal_scale(const ForwardOperator& op, const Image& p, const Sinogram& s);

/// Data residual norm R = ||M p0 - s||^2 / ||s||^2.
///
/// Bins of s the forward model cannot reach are zeroed first. With
/// clamp_negatives, p0 is replaced by max(p0, 0); with optimal_scale, M p0
/// is rescaled by its least-squares factor (an all-zero M p0 gives R = 1).
/// Throws degenerate when s vanishes on every reachable bin.
double residual_norm(const ForwardOperator& op, const Image& p0, const Sinogram& s,
                     bool clamp_negatives = true, bool optimal_scale = true);

/// Same as above on double buffers, with the mask precomputed.
double residual_norm(const ForwardOperator& op, const ReachMask& mask,
                     std::span<const double> p0, std::span<const double> s,
                     bool clamp_negatives, bool optimal_scale);

struct MetricReport {
  std::optional<double> residual_norm;
  double mae = 0.0;
  double mae_rel = 0.0;
  double mse = 0.0;
  double mse_rel = 0.0;
  double ssim = 0.0;
  /// Factors applied to the reconstruction before the MAE and MSE families
  /// (1 when per-metric scaling is off).
  double mae_scale = 1.0;
  double mse_scale = 1.0;
};

struct MetricOptions {
  /// Rescale the reconstruction separately for the MAE and MSE families so
  /// that each metric is minimal. SSIM is always computed unscaled.
  bool scale_per_metric = false;
  bool clamp_negatives = false;
  std::size_t ssim_window = 21;
};

/// MAE = ||rec - ref||_1 / N, MSE = ||rec - ref||_2^2 / N, relative
/// variants divide by ||ref||_1 and ||ref||_2^2 respectively. Throws
/// degenerate for an all-zero reference.
MetricReport image_metrics(const Image& rec, const Image& ref, const MetricOptions& options = {});

/// Mean SSIM over every valid window x window position (stride 1, uniform
/// weights, population statistics), with c1 = (0.01 max(ref))^2 and
/// c2 = (0.03 max(ref))^2.
double ssim(const Image& rec, const Image& ref, std::size_t window = 21);

/// argmin_a ||a rec - ref||_2^2.
double mse_optimal_scale(std::span<const float> rec, std::span<const float> ref);
/// argmin_a ||a rec - ref||_1, the |rec|-weighted median of ref / rec.
double mae_optimal_scale(std::span<const float> rec, std::span<const float> ref);

} // namespace oatk
