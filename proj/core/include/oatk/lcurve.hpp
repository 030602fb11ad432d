#pragma once

#include <cstddef>
#include <span>
#include <stop_token>
#include <vector>

#include "oatk/sparsa.hpp"

namespace oatk {

struct LCurvePoint {
  double lambda = 0.0;
  double residual = 0.0;    ///< ||M p - s||^2
  double regularizer = 0.0; ///< ||SH(p)||_1
};

struct CornerSelection {
  std::size_t index = 0;
  /// Signed Menger curvature per point in (log residual, log regularizer);
  /// NaN at the two end points. Positive where the curve turns like an L.
  std::vector<double> curvature;
  /// No interior point exceeds the tolerance: index is the middle point.
  bool degenerate = false;
};

struct LCurveResult {
  double lambda = 0.0;
  std::vector<LCurvePoint> points;
  std::vector<double> curvature;
  bool degenerate = false;
  /// Residual non-decreasing along the ascending lambda grid.
  bool residual_monotone = true;
};

/// Corner of an L-curve given in ascending lambda order (at least 3 points).
CornerSelection select_corner(std::span<const LCurvePoint> points, double tolerance = 1e-9);

/// Solves the MB problem once per lambda (at most `sweep_iters` iterations
/// each, from the largest lambda down, warm-starting every solve from the
/// previous one) and returns the lambda of maximum curvature.
/// A degenerate curve yields the geometric median of the grid and sets the
/// flag. Throws invalid_argument for fewer than 5 values, non-positive
/// values or a grid without spread.
LCurveResult l_curve_select(const ForwardOperator& op, const Sinogram& s,
                            std::span<const double> lambdas, const MbConfig& base,
                            std::size_t sweep_iters = 40, std::stop_token stop = {});

/// lambda_max * 10^k for k = -6 .. -1, ascending.
std::vector<double> default_lambda_grid(const ForwardOperator& op, const Sinogram& s,
                                        const ShearletSystem& shearlets);

/// sparsa_reconstruct with an unset lambda resolved on the default grid.
MbResult reconstruct_mb(const ForwardOperator& op, const Sinogram& s, const MbConfig& config,
                        const SolveOptions& options = {});

} // namespace oatk
