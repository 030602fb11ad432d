#include "oatk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oatk/error.hpp"

namespace oatk {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void check_same_grid(const Image& a, const Image& b) {
  require(a.nx() == b.nx() && a.ny() == b.ny(), ErrorCode::dimension_mismatch,
          "metrics: images differ in size");
}

// Summed-area table with a zero first row/column: (ny+1) x (nx+1).
std::vector<double> integral(std::span<const double> v, std::size_t ny, std::size_t nx) {
  std::vector<double> s((ny + 1) * (nx + 1), 0.0);
  for (std::size_t r = 0; r < ny; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < nx; ++c) {
      row += v[r * nx + c];
      s[(r + 1) * (nx + 1) + c + 1] = s[r * (nx + 1) + c + 1] + row;
    }
  }
  return s;
}

double box(const std::vector<double>& s, std::size_t nx, std::size_t r, std::size_t c,
           std::size_t w) {
  const std::size_t W = nx + 1;
  return s[(r + w) * W + c + w] - s[r * W + c + w] - s[(r + w) * W + c] + s[r * W + c];
}

} // namespace

double optimal_scale(std::span<const double> mp, std::span<const double> s) {
  require(mp.size() == s.size(), ErrorCode::dimension_mismatch, "optimal scale: size mismatch");
  const double denom = dot(mp, mp);
  require(denom > 0.0, ErrorCode::degenerate, "optimal scale: M p is identically zero");
  return dot(mp, s) / denom;
}

double optimal_scale(const ForwardOperator& op, const Image& p, const Sinogram& s) {
  op.check_image(p);
  op.check_sinogram(s);
  const auto mp = op.apply(to_double(p.pixels()));
  return optimal_scale(mp, to_double(s.samples()));
}

double residual_norm(const ForwardOperator& op, const ReachMask& mask,
                     std::span<const double> p0, std::span<const double> s,
                     bool clamp_negatives, bool use_optimal_scale) {
  require(s.size() == op.sinogram_size() && p0.size() == op.image_size(),
          ErrorCode::dimension_mismatch, "residual norm: size mismatch");
  std::vector<double> masked(s.begin(), s.end());
  mask.apply(masked);
  const double s_energy = dot(masked, masked);
  require(s_energy > 0.0, ErrorCode::degenerate,
          "residual norm: sinogram is zero on every reachable bin");

  std::vector<double> p(p0.begin(), p0.end());
  if (clamp_negatives)
    for (auto& v : p) v = std::max(v, 0.0);
  auto mp = op.apply(p);
  double alpha = 1.0;
  if (use_optimal_scale) {
    const double mp_energy = dot(mp, mp);
    alpha = mp_energy > 0.0 ? dot(mp, masked) / mp_energy : 0.0;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < mp.size(); ++i) {
    const double e = alpha * mp[i] - masked[i];
    err += e * e;
  }
  return err / s_energy;
}

double residual_norm(const ForwardOperator& op, const Image& p0, const Sinogram& s,
                     bool clamp_negatives, bool use_optimal_scale) {
  op.check_image(p0);
  op.check_sinogram(s);
  return residual_norm(op, reach_mask(op), to_double(p0.pixels()), to_double(s.samples()),
                       clamp_negatives, use_optimal_scale);
}

double mse_optimal_scale(std::span<const float> rec, std::span<const float> ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    num += static_cast<double>(rec[i]) * ref[i];
    den += static_cast<double>(rec[i]) * rec[i];
  }
  return den > 0.0 ? num / den : 1.0;
}

double mae_optimal_scale(std::span<const float> rec, std::span<const float> ref) {
  std::vector<std::pair<double, double>> ratios; // (ratio, weight)
  double total = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (rec[i] == 0.0f) continue;
    const double w = std::abs(static_cast<double>(rec[i]));
    ratios.emplace_back(static_cast<double>(ref[i]) / rec[i], w);
    total += w;
  }
  if (ratios.empty()) return 1.0;
  std::sort(ratios.begin(), ratios.end());
  double acc = 0.0;
  for (const auto& [ratio, w] : ratios) {
    acc += w;
    if (acc >= 0.5 * total) return ratio + 0.0;
  }
  return ratios.back().first;
}

double ssim(const Image& rec, const Image& ref, std::size_t window) {
  check_same_grid(rec, ref);
  const std::size_t ny = ref.ny(), nx = ref.nx();
  require(window >= 1 && window <= ny && window <= nx, ErrorCode::invalid_argument,
          "ssim: window larger than the image");
  const auto a = to_double(rec.pixels());
  const auto b = to_double(ref.pixels());
  const double peak = *std::max_element(b.begin(), b.end());
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto sa = integral(a, ny, nx), sb = integral(b, ny, nx);
  const auto saa = integral(aa, ny, nx), sbb = integral(bb, ny, nx), sab = integral(ab, ny, nx);
  const double inv = 1.0 / static_cast<double>(window * window);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + window <= ny; ++r)
    for (std::size_t c = 0; c + window <= nx; ++c) {
      const double mu_a = box(sa, nx, r, c, window) * inv;
      const double mu_b = box(sb, nx, r, c, window) * inv;
      const double var_a = std::max(box(saa, nx, r, c, window) * inv - mu_a * mu_a, 0.0);
      const double var_b = std::max(box(sbb, nx, r, c, window) * inv - mu_b * mu_b, 0.0);
      const double cov = box(sab, nx, r, c, window) * inv - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      // Only two all-zero windows (with zero constants) give 0/0; they match.
      total += den > 0.0 ? num / den : 1.0;
      ++count;
    }
  return total / static_cast<double>(count);
}

MetricReport image_metrics(const Image& rec_in, const Image& ref, const MetricOptions& options) {
  check_same_grid(rec_in, ref);
  const Image rec = options.clamp_negatives ? clamp_negatives(rec_in) : rec_in;
  const auto r = rec.pixels();
  const auto m = ref.pixels();
  double ref_l1 = 0.0, ref_l2 = 0.0;
  for (float v : m) {
    ref_l1 += std::abs(static_cast<double>(v));
    ref_l2 += static_cast<double>(v) * v;
  }
  require(ref_l1 > 0.0, ErrorCode::degenerate, "metrics: reference image is all zero");

  MetricReport out;
  if (options.scale_per_metric) {
    out.mae_scale = mae_optimal_scale(r, m);
    out.mse_scale = mse_optimal_scale(r, m);
  }
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    l1 += std::abs(out.mae_scale * r[i] - static_cast<double>(m[i]));
    const double e = out.mse_scale * r[i] - static_cast<double>(m[i]);
    l2 += e * e;
  }
  const auto n = static_cast<double>(r.size());
  out.mae = l1 / n;
  out.mae_rel = l1 / ref_l1;
  out.mse = l2 / n;
  out.mse_rel = l2 / ref_l2;
  out.ssim = ssim(rec, ref, options.ssim_window);
  return out;
}

} // namespace oatk
