#include "oatk/lcurve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "oatk/direct_recon.hpp"
#include "oatk/error.hpp"

namespace oatk {

namespace {

// Logs with a floor so that an exactly vanishing coordinate (zero image at
// large lambda) stays finite.
std::vector<double> safe_log(const std::vector<double>& v) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, x);
  const double floor = peak > 0.0 ? peak * 1e-12 : std::numeric_limits<double>::min();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::log(std::max(v[i], floor));
  return out;
}

} // namespace

CornerSelection select_corner(std::span<const LCurvePoint> points, double tolerance) {
  require(points.size() >= 3, ErrorCode::invalid_argument, "l-curve: need at least 3 points");
  std::vector<double> res, reg;
  for (const auto& p : points) {
    res.push_back(p.residual);
    reg.push_back(p.regularizer);
  }
  const auto x = safe_log(res);
  const auto y = safe_log(reg);

  CornerSelection out;
  out.curvature.assign(points.size(), std::numeric_limits<double>::quiet_NaN());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    const double ax = x[i] - x[i - 1], ay = y[i] - y[i - 1];
    const double bx = x[i + 1] - x[i], by = y[i + 1] - y[i];
    const double cx = x[i + 1] - x[i - 1], cy = y[i + 1] - y[i - 1];
    const double denom = std::hypot(ax, ay) * std::hypot(bx, by) * std::hypot(cx, cy);
    const double cross = ax * by - ay * bx;
    const double k = denom > 0.0 ? 2.0 * cross / denom : 0.0;
    out.curvature[i] = k;
    if (k > best) {
      best = k;
      out.index = i;
    }
  }
  if (!(best > tolerance)) {
    out.degenerate = true;
    out.index = points.size() / 2;
  }
  return out;
}

LCurveResult l_curve_select(const ForwardOperator& op, const Sinogram& s,
                            std::span<const double> lambdas, const MbConfig& base,
                            std::size_t sweep_iters, std::stop_token stop) {
  require(lambdas.size() >= 5, ErrorCode::invalid_argument, "l-curve: need at least 5 lambda values");
  for (double l : lambdas)
    require(l > 0.0 && std::isfinite(l), ErrorCode::invalid_argument,
            "l-curve: lambda values must be positive and finite");
  std::vector<double> grid(lambdas.begin(), lambdas.end());
  std::sort(grid.begin(), grid.end());
  require(grid.back() > grid.front() * (1.0 + 1e-12), ErrorCode::invalid_argument,
          "l-curve: lambda grid has no spread");
  require(sweep_iters >= 1, ErrorCode::invalid_argument, "l-curve: sweep needs >= 1 iteration");

  const ShearletSystem sh(op.grid().ny, op.grid().nx, base.shearlet_scales);
  MbConfig cfg = base;
  cfg.max_iters = std::min(base.max_iters, sweep_iters);

  SolveOptions options;
  options.shearlets = &sh;
  options.stop = stop;
  options.skip_residual = true;
  // Continuation: start at the largest lambda (fast to converge) and warm
  // start each smaller one from the previous solution, so truncated solves
  // still trace the curve in order.
  options.initial = mb_initial_image(op, s, base.init);

  const auto data = to_double(s.samples());
  LCurveResult out;
  out.points.resize(grid.size());
  for (std::size_t k = grid.size(); k-- > 0;) {
    cfg.lambda = grid[k];
    const auto r = sparsa_reconstruct(op, s, cfg, options);
    auto x = to_double(r.image.pixels());
    auto res = op.apply(x);
    double misfit = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) misfit += (res[i] - data[i]) * (res[i] - data[i]);
    out.points[k] = {grid[k], misfit, l1_norm(sh.analysis(std::span<const double>(x)))};
    options.initial = std::move(x);
  }
  for (std::size_t i = 1; i < out.points.size(); ++i)
    if (out.points[i].residual < out.points[i - 1].residual) out.residual_monotone = false;

  const auto corner = select_corner(out.points);
  out.curvature = corner.curvature;
  out.degenerate = corner.degenerate;
  if (corner.degenerate) {
    double log_sum = 0.0;
    for (double l : grid) log_sum += std::log(l);
    out.lambda = std::exp(log_sum / static_cast<double>(grid.size()));
  } else {
    out.lambda = out.points[corner.index].lambda;
  }
  return out;
}

std::vector<double> default_lambda_grid(const ForwardOperator& op, const Sinogram& s,
                                        const ShearletSystem& shearlets) {
  const double top = lambda_max(op, s, shearlets);
  require(top > 0.0, ErrorCode::degenerate, "l-curve: sinogram has no component in range of M");
  std::vector<double> grid;
  for (int k = -6; k <= -1; ++k) grid.push_back(top * std::pow(10.0, k));
  return grid;
}

MbResult reconstruct_mb(const ForwardOperator& op, const Sinogram& s, const MbConfig& config,
                        const SolveOptions& options) {
  if (config.lambda) return sparsa_reconstruct(op, s, config, options);
  std::optional<ShearletSystem> owned;
  if (!options.shearlets) owned.emplace(op.grid().ny, op.grid().nx, config.shearlet_scales);
  const ShearletSystem& sh = options.shearlets ? *options.shearlets : *owned;
  const auto grid = default_lambda_grid(op, s, sh);
  const auto curve = l_curve_select(op, s, grid, config, 40, options.stop);
  MbConfig resolved = config;
  resolved.lambda = curve.lambda;
  SolveOptions opts = options;
  opts.shearlets = &sh;
  return sparsa_reconstruct(op, s, resolved, opts);
}

} // namespace oatk
