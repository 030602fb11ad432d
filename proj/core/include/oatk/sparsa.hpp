#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "oatk/data.hpp"
#include "oatk/forward_model.hpp"
#include "oatk/shearlet.hpp"

namespace oatk {

enum class MbInit { scaled_backprojection, zero };

struct MbConfig {
  /// Regularization weight; nullopt means "auto" (L-curve).
  std::optional<double> lambda;
  std::size_t max_iters = 200;
  /// Stop once the relative objective change stays below this for
  /// `tol_window` consecutive iterations and then once more on a step of
  /// safe (1 / Lipschitz) length.
  double rel_obj_tol = 1e-6;
  std::size_t tol_window = 1;
  /// Safeguard interval for the Barzilai-Borwein curvature estimate.
  double bb_min = 1e-8;
  double bb_max = 1e8;
  bool monotone = true;
  double backtrack_factor = 2.0;
  std::size_t max_backtracks = 50;
  MbInit init = MbInit::scaled_backprojection;
  /// Shearlet scales; 0 selects the size-dependent default.
  std::size_t shearlet_scales = 0;

  void validate() const;
};

struct SolveReport {
  /// Objective ||M p - s||^2 + lambda ||SH(p)||_1: entry 0 is the
  /// initializer, entry k the iterate after iteration k.
  std::vector<double> objective_trace;
  std::size_t iterations_run = 0;
  bool converged = false;
  /// "tolerance", "exact" (zero objective), "max_iters" or "no_descent".
  std::string stop_reason;
  double lambda = 0.0;
  /// residual_norm(op, image, s, clamp, optimal scale) of the result; NaN
  /// when s vanishes on every reachable bin (R undefined).
  double residual_norm_R = 0.0;
};

struct MbResult {
  Image image;
  SolveReport report;
};

struct SolveOptions {
  /// Reused when non-null; otherwise a system is built for the grid.
  const ShearletSystem* shearlets = nullptr;
  /// Overrides the configured initializer when set.
  std::optional<std::vector<double>> initial;
  /// Checked between iterations; a stop request throws Error(cancelled).
  std::stop_token stop;
  /// Skip computing residual_norm_R (used inside L-curve sweeps).
  bool skip_residual = false;
};

/// Non-negative shearlet-L1 model-based reconstruction
///   argmin_{p >= 0} ||M p - s||^2 + lambda ||SH(p)||_1
/// by SpaRSA: gradient step with an alternating Barzilai-Borwein step length, frame
/// soft-thresholding in the shearlet domain, synthesis, then projection
/// onto p >= 0. In monotone mode the curvature estimate is multiplied by
/// `backtrack_factor` until the objective does not increase.
MbResult sparsa_reconstruct(const ForwardOperator& op, const Sinogram& s, const MbConfig& config,
                            const SolveOptions& options = {});

/// Start image for `init`: zeros, or the clamped backprojection times its
/// least-squares data scale.
std::vector<double> mb_initial_image(const ForwardOperator& op, const Sinogram& s, MbInit init);

/// Smallest lambda for which the zero image satisfies the first-order
/// optimality conditions of the unconstrained problem,
/// max |SH(2 M^T s)|.
double lambda_max(const ForwardOperator& op, const Sinogram& s, const ShearletSystem& shearlets);

/// Largest eigenvalue of M^T M by power iteration.
double operator_norm_sq(const ForwardOperator& op, std::size_t iterations = 20);

} // namespace oatk
