#include "oatk/sparsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oatk/direct_recon.hpp"
#include "oatk/error.hpp"
#include "oatk/metrics.hpp"

namespace oatk {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Objective pieces for a non-negative iterate.
struct Evaluation {
  std::vector<double> residual; // M p - s
  double misfit = 0.0;          // ||M p - s||^2
  double regularizer = 0.0;     // ||SH(p)||_1
  double objective = 0.0;
};

Evaluation evaluate(const ForwardOperator& op, const ShearletSystem& sh,
                    std::span<const double> p, std::span<const double> s, double lambda) {
  Evaluation e;
  e.residual = op.apply(p);
  for (std::size_t i = 0; i < s.size(); ++i) e.residual[i] -= s[i];
  e.misfit = dot(e.residual, e.residual);
  e.regularizer = lambda > 0.0 ? l1_norm(sh.analysis(p)) : 0.0;
  e.objective = e.misfit + lambda * e.regularizer;
  if (!std::isfinite(e.objective))
    fail(ErrorCode::numerical, "sparsa: objective is not finite");
  return e;
}

} // namespace

std::vector<double> mb_initial_image(const ForwardOperator& op, const Sinogram& s, MbInit init) {
  op.check_sinogram(s);
  std::vector<double> x(op.image_size(), 0.0);
  if (init == MbInit::zero) return x;
  const auto data = to_double(s.samples());
  const Image bp = clamp_negatives(backproject(s, op.grid(), op.sos_mps()));
  x = to_double(bp.pixels());
  const auto mx = op.apply(x);
  const double energy = dot(mx, mx);
  const double alpha = energy > 0.0 ? std::max(dot(mx, data) / energy, 0.0) : 0.0;
  for (auto& v : x) v *= alpha;
  return x;
}

void MbConfig::validate() const {
  require(!lambda || (*lambda >= 0.0 && std::isfinite(*lambda)), ErrorCode::invalid_argument,
          "mb: lambda must be finite and >= 0");
  require(max_iters >= 1, ErrorCode::invalid_argument, "mb: max_iters must be >= 1");
  require(rel_obj_tol > 0.0 && tol_window >= 1, ErrorCode::invalid_argument,
          "mb: tolerance must be > 0");
  require(bb_min > 0.0 && bb_max > bb_min, ErrorCode::invalid_argument,
          "mb: need 0 < bb_min < bb_max");
  require(backtrack_factor > 1.0, ErrorCode::invalid_argument,
          "mb: backtrack factor must be > 1");
}

double operator_norm_sq(const ForwardOperator& op, std::size_t iterations) {
  std::vector<double> v(op.image_size(), 1.0 / std::sqrt(static_cast<double>(op.image_size())));
  double estimate = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    const auto w = op.adjoint(op.apply(v));
    const double norm = std::sqrt(dot(w, w));
    if (norm == 0.0) return 0.0;
    estimate = dot(v, w);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / norm;
  }
  return estimate;
}

double lambda_max(const ForwardOperator& op, const Sinogram& s, const ShearletSystem& sh) {
  op.check_sinogram(s);
  auto g = op.adjoint(to_double(s.samples()));
  for (auto& v : g) v *= 2.0;
  const auto c = sh.analysis(std::span<const double>(g));
  double m = 0.0;
  for (double v : c.values) m = std::max(m, std::abs(v));
  return m;
}

MbResult sparsa_reconstruct(const ForwardOperator& op, const Sinogram& s, const MbConfig& config,
                            const SolveOptions& options) {
  config.validate();
  require(config.lambda.has_value(), ErrorCode::invalid_argument,
          "sparsa: lambda is unresolved (run the L-curve selection first)");
  op.check_sinogram(s);
  const double lambda = *config.lambda;
  const auto& grid = op.grid();

  std::optional<ShearletSystem> owned;
  if (!options.shearlets) owned.emplace(grid.ny, grid.nx, config.shearlet_scales);
  const ShearletSystem& sh = options.shearlets ? *options.shearlets : *owned;
  require(sh.ny() == grid.ny && sh.nx() == grid.nx, ErrorCode::dimension_mismatch,
          "sparsa: shearlet system does not match the image grid");

  const auto data = to_double(s.samples());
  std::vector<double> x;
  if (options.initial) {
    require(options.initial->size() == op.image_size(), ErrorCode::dimension_mismatch,
            "sparsa: initial image has the wrong size");
    x = *options.initial;
    for (auto& v : x) v = std::max(v, 0.0);
  } else {
    x = mb_initial_image(op, s, config.init);
  }

  SolveReport report;
  report.lambda = lambda;
  Evaluation cur = evaluate(op, sh, x, data, lambda);
  report.objective_trace.push_back(cur.objective);

  // Safe step: 1.1 x the Lipschitz constant of the misfit gradient.
  const double safe_alpha = std::clamp(2.0 * 1.1 * operator_norm_sq(op, 10), config.bb_min, config.bb_max);
  double alpha = safe_alpha;
  std::size_t small_steps = 0;
  std::vector<double> u(x.size()), grad(x.size()), next(x.size());
  std::vector<double> prev_x, prev_grad;

  // Proximal-gradient step of length 1/step from x into `next`.
  auto prox_step = [&](double step) {
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] - grad[i] / step;
    auto c = sh.analysis(std::span<const double>(u));
    soft_threshold(c.values, lambda / step);
    sh.synthesis(c, next);
    for (auto& v : next) v = std::max(v, 0.0);
    return evaluate(op, sh, next, data, lambda);
  };

  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    if (options.stop.stop_requested()) fail(ErrorCode::cancelled, "sparsa: cancelled");
    if (cur.objective == 0.0) {
      report.converged = true;
      report.stop_reason = "exact";
      break;
    }

    op.adjoint(cur.residual, grad);
    for (auto& g : grad) g *= 2.0;

    // Barzilai-Borwein curvature from dx and dg = grad - prev_grad,
    // alternating the long (<dx,dg>/<dx,dx>) and short (<dg,dg>/<dx,dg>)
    // estimates. The long one alone backtracks often under the monotone rule.
    if (!prev_x.empty()) {
      double xx = 0.0, xg = 0.0, gg = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - prev_x[i], dg = grad[i] - prev_grad[i];
        xx += dx * dx;
        xg += dx * dg;
        gg += dg * dg;
      }
      if (xx > 0.0 && xg > 0.0)
        alpha = std::clamp(iter % 2 ? xg / xx : gg / xg, config.bb_min, config.bb_max);
    }
    prev_x = x;
    prev_grad = grad;

    // A run of small changes can come from heavily backtracked BB steps, so
    // it is confirmed with one safe step, the same step a restart from the
    // current iterate would take first.
    const bool certifying = small_steps >= config.tol_window;
    bool accepted = false;
    Evaluation trial;
    double step = certifying ? safe_alpha : alpha;
    for (std::size_t bt = 0; bt <= config.max_backtracks; ++bt) {
      trial = prox_step(step);
      if (!config.monotone || trial.objective <= cur.objective) {
        accepted = true;
        break;
      }
      step *= config.backtrack_factor;
    }
    if (!accepted) {
      report.converged = true;
      report.stop_reason = "no_descent";
      break;
    }

    const double rel = std::abs(cur.objective - trial.objective) /
                       std::max(cur.objective, std::numeric_limits<double>::min());
    std::swap(x, next);
    cur = std::move(trial);
    report.objective_trace.push_back(cur.objective);
    report.iterations_run = iter;

    small_steps = rel < config.rel_obj_tol ? small_steps + 1 : 0;
    if (certifying && rel < config.rel_obj_tol) {
      report.converged = true;
      report.stop_reason = "tolerance";
      break;
    }
    if (certifying) small_steps = 0;
  }
  if (report.stop_reason.empty()) report.stop_reason = "max_iters";

  Image image = make_image(grid, x);
  if (!options.skip_residual) {
    // Residual of the returned float image, as an external caller sees it.
    const double s_energy = [&] {
      auto masked = data;
      reach_mask(op).apply(masked);
      return dot(masked, masked);
    }();
    report.residual_norm_R = s_energy > 0.0 ? residual_norm(op, image, s, true, true)
                                            : std::numeric_limits<double>::quiet_NaN();
  }
  return {std::move(image), std::move(report)};
}

} // namespace oatk
