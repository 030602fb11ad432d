#include <doctest.h>

#include <cmath>

#include "check.hpp"
#include "oatk/forward_model.hpp"
#include "oatk/metrics.hpp"
#include "oatk/unmix.hpp"
#include "oracles.hpp"

using namespace oatk;

namespace {

// Arc whose record extends well past the reachable bins on both sides.
struct Setup {
  ArrayGeometry g;
  ImageGrid grid;
  Setup() {
    g.n_detectors = 8;
    g.n_time_samples = 400;
    g.t0_offset_samples = 900;
    grid.nx = grid.ny = 12;
    grid.fov_x_m = grid.fov_y_m = 0.0012;
  }
  ForwardOperator op() const { return ForwardOperator(g, grid, 1500.0); }
  Image image(std::uint64_t seed) const {
    return make_image(grid, oracle::random_vector(grid.size(), seed, 0.0, 1.0));
  }
};

Image image_of(std::size_t ny, std::size_t nx, std::vector<double> v) {
  ImageGrid g;
  g.ny = ny;
  g.nx = nx;
  return make_image(g, v);
}

// Exhaustive NNLS for a handful of columns: least squares on every passive
// set, keeping the best feasible candidate.
std::vector<double> nnls_bruteforce(const std::vector<double>& a, std::size_t rows,
                                    std::size_t cols, const std::vector<double>& b) {
  std::vector<double> best(cols, 0.0);
  double best_obj = oracle::dot(b, b);
  for (std::size_t mask = 1; mask < (std::size_t{1} << cols); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t c = 0; c < cols; ++c)
      if (mask >> c & 1) idx.push_back(c);
    const std::size_t k = idx.size();
    // Normal equations, Gaussian elimination with partial pivoting.
    std::vector<double> m(k * (k + 1), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t r = 0; r < rows; ++r)
          m[i * (k + 1) + j] += a[idx[i] * rows + r] * a[idx[j] * rows + r];
      for (std::size_t r = 0; r < rows; ++r) m[i * (k + 1) + k] += a[idx[i] * rows + r] * b[r];
    }
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < k; ++r)
        if (std::abs(m[r * (k + 1) + col]) > std::abs(m[piv * (k + 1) + col])) piv = r;
      for (std::size_t j = 0; j <= k; ++j) std::swap(m[col * (k + 1) + j], m[piv * (k + 1) + j]);
      for (std::size_t r = 0; r < k; ++r) {
        if (r == col) continue;
        const double f = m[r * (k + 1) + col] / m[col * (k + 1) + col];
        for (std::size_t j = col; j <= k; ++j) m[r * (k + 1) + j] -= f * m[col * (k + 1) + j];
      }
    }
    std::vector<double> x(cols, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < k; ++i) {
      x[idx[i]] = m[i * (k + 1) + k] / m[i * (k + 1) + i];
      feasible = feasible && x[idx[i]] >= 0.0;
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      double v = -b[r];
      for (std::size_t c = 0; c < cols; ++c) v += a[c * rows + r] * x[c];
      obj += v * v;
    }
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

SpectraMatrix random_spectra(std::size_t n_chrom, std::uint64_t seed) {
  SpectraMatrix h;
  h.wavelengths_nm = default_wavelengths_nm();
  for (std::size_t c = 0; c < n_chrom; ++c) h.chromophores.push_back("c" + std::to_string(c));
  h.absorption = oracle::random_vector(n_chrom * h.wavelengths_nm.size(), seed, 0.05, 1.0);
  return h;
}

MultispectralStack stack_from(const std::vector<double>& w, const SpectraMatrix& h,
                              const ImageGrid& grid) {
  MultispectralStack stack;
  stack.wavelengths_nm = h.wavelengths_nm;
  for (std::size_t l = 0; l < h.n_wavelengths(); ++l) {
    std::vector<double> px(grid.size(), 0.0);
    for (std::size_t j = 0; j < grid.size(); ++j)
      for (std::size_t c = 0; c < h.n_chromophores(); ++c)
        px[j] += w[j * h.n_chromophores() + c] * h.at(c, l);
    stack.images.push_back(make_image(grid, px));
  }
  return stack;
}

} // namespace

TEST_CASE("residual norm basics") {
  const Setup st;
  const auto op = st.op();
  const Image p = st.image(1);
  const Sinogram s = forward_apply(op, p);
  CHECK(residual_norm(op, Image(st.grid), s) == doctest::Approx(1.0));
  CHECK(residual_norm(op, Image(st.grid), s, false, false) == doctest::Approx(1.0));
  CHECK(residual_norm(op, p, s) <= 1e-12);
  CHECK(residual_norm(op, p, s, false, false) <= 1e-12);

  const Sinogram noisy = make_sinogram(st.g, oracle::random_vector(op.sinogram_size(), 4));
  const Image doubled = make_image(st.grid, [&] {
    auto v = to_double(p.pixels());
    for (auto& x : v) x *= 2.0;
    return v;
  }());
  CHECK(residual_norm(op, doubled, noisy) == doctest::Approx(residual_norm(op, p, noisy)).epsilon(1e-9));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Image q = make_image(st.grid, oracle::random_vector(st.grid.size(), 50 + seed));
    CHECK(residual_norm(op, q, noisy, false, false) >= 0.0);
    CHECK(residual_norm(op, q, noisy, true, true) >= 0.0);
    CHECK(residual_norm(op, q, noisy, true, true) <= 1.0 + 1e-12);
  }
}

TEST_CASE("residual norm against its definition") {
  const Setup st;
  const auto op = st.op();
  const Image p = make_image(st.grid, oracle::random_vector(st.grid.size(), 8, -0.5, 1.0));
  const auto sv = oracle::random_vector(op.sinogram_size(), 9);
  const Sinogram s = make_sinogram(st.g, sv);
  const auto mask = reach_mask(op);
  auto masked = sv;
  for (std::size_t i = 0; i < masked.size(); ++i)
    if (!mask.bits()[i]) masked[i] = 0.0;
  auto clamped = to_double(p.pixels());
  for (auto& v : clamped) v = std::max(v, 0.0);
  const auto mp = oracle::forward(st.g, st.grid, 1500.0,
                                  oracle::model_kernel(oracle::eir_taps(4e6, 1.53, 129, 40e6)), clamped);
  const double alpha = oracle::golden_section(
      [&](double a) {
        double e = 0.0;
        for (std::size_t i = 0; i < mp.size(); ++i) e += (a * mp[i] - masked[i]) * (a * mp[i] - masked[i]);
        return e;
      },
      -100.0, 100.0);
  double err = 0.0;
  for (std::size_t i = 0; i < mp.size(); ++i) err += (alpha * mp[i] - masked[i]) * (alpha * mp[i] - masked[i]);
  CHECK(residual_norm(op, p, s) == doctest::Approx(err / oracle::dot(masked, masked)).epsilon(1e-6));
}

TEST_CASE("changing unreachable bins leaves R unchanged") {
  const Setup st;
  const auto op = st.op();
  const auto mask = reach_mask(op);
  REQUIRE(mask.count() < op.sinogram_size());
  const Image p = st.image(2);
  const auto sv = oracle::random_vector(op.sinogram_size(), 10);
  auto tampered = sv;
  for (std::size_t i = 0; i < tampered.size(); ++i)
    if (!mask.bits()[i]) tampered[i] = 1e3 * static_cast<double>(i % 7);
  CHECK(residual_norm(op, p, make_sinogram(st.g, tampered)) ==
        residual_norm(op, p, make_sinogram(st.g, sv)));

  std::vector<double> outside(op.sinogram_size(), 0.0);
  for (std::size_t i = 0; i < outside.size(); ++i)
    if (!mask.bits()[i]) outside[i] = 1.0;
  CHECK_ERROR(residual_norm(op, p, make_sinogram(st.g, outside)), ErrorCode::degenerate);
}

TEST_CASE("optimal scale closed form") {
  const Setup st;
  const auto op = st.op();
  const Image p = st.image(3);
  const auto mp = op.apply(to_double(p.pixels()));
  auto twice = mp;
  for (auto& v : twice) v *= 2.0;
  CHECK(optimal_scale(op, p, make_sinogram(st.g, twice)) == doctest::Approx(2.0));

  auto orth = oracle::random_vector(mp.size(), 5);
  const double proj = oracle::dot(orth, mp) / oracle::dot(mp, mp);
  for (std::size_t i = 0; i < orth.size(); ++i) orth[i] -= proj * mp[i];
  CHECK(std::abs(optimal_scale(mp, orth)) <= 1e-12);

  const auto s = oracle::random_vector(mp.size(), 6);
  const double golden = oracle::golden_section(
      [&](double a) {
        double e = 0.0;
        for (std::size_t i = 0; i < mp.size(); ++i) e += (a * mp[i] - s[i]) * (a * mp[i] - s[i]);
        return e;
      },
      -1e3, 1e3);
  CHECK(std::abs(optimal_scale(mp, s) - golden) <= 1e-6);
  CHECK_ERROR(optimal_scale(op, Image(st.grid), make_sinogram(st.g, s)), ErrorCode::degenerate);
}

TEST_CASE("image metrics on identical and zero reconstructions") {
  const auto ref = image_of(30, 30, oracle::random_vector(900, 1, 0.0, 1.0));
  const auto same = image_metrics(ref, ref);
  CHECK(same.mae == 0.0);
  CHECK(same.mse == 0.0);
  CHECK(same.ssim == doctest::Approx(1.0));
  const auto zero = image_metrics(image_of(30, 30, std::vector<double>(900, 0.0)), ref);
  CHECK(zero.mae_rel == doctest::Approx(1.0));
  CHECK(zero.mse_rel == doctest::Approx(1.0));
  CHECK_ERROR(image_metrics(ref, image_of(30, 30, std::vector<double>(900, 0.0))), ErrorCode::degenerate);
  CHECK_ERROR(image_metrics(ref, image_of(30, 31, std::vector<double>(930, 1.0))),
              ErrorCode::dimension_mismatch);
}

TEST_CASE("metric definitions by direct summation") {
  const auto a = oracle::random_vector(25 * 25, 2, -0.2, 1.0);
  const auto b = oracle::random_vector(25 * 25, 3, 0.0, 1.0);
  const auto m = image_metrics(image_of(25, 25, a), image_of(25, 25, b), {false, false, 21});
  double l1 = 0, l2 = 0, r1 = 0, r2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = static_cast<float>(a[i]), bi = static_cast<float>(b[i]);
    l1 += std::abs(ai - bi);
    l2 += (ai - bi) * (ai - bi);
    r1 += std::abs(bi);
    r2 += bi * bi;
  }
  CHECK(m.mae == doctest::Approx(l1 / 625.0));
  CHECK(m.mse == doctest::Approx(l2 / 625.0));
  CHECK(m.mae_rel == doctest::Approx(l1 / r1));
  CHECK(m.mse_rel == doctest::Approx(l2 / r2));
}

TEST_CASE("per-metric scales minimise their metric") {
  const auto a = oracle::random_vector(400, 4, 0.0, 1.0);
  auto b = a;
  const auto n = oracle::random_vector(400, 5, -0.3, 0.3);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::max(0.0, 3.0 * a[i] + n[i]);
  const Image rec = image_of(20, 20, a), ref = image_of(20, 20, b);
  const auto m = image_metrics(rec, ref, {true, false, 7});
  const auto r = to_double(rec.pixels()), f = to_double(ref.pixels());
  auto l2 = [&](double s) {
    double e = 0;
    for (std::size_t i = 0; i < r.size(); ++i) e += (s * r[i] - f[i]) * (s * r[i] - f[i]);
    return e;
  };
  auto l1 = [&](double s) {
    double e = 0;
    for (std::size_t i = 0; i < r.size(); ++i) e += std::abs(s * r[i] - f[i]);
    return e;
  };
  CHECK(l2(m.mse_scale) <= l2(oracle::golden_section(l2, -10, 10)) * (1.0 + 1e-12));
  // Bisection on the sign of the summed derivative pins the minimiser to
  // full precision.
  double a_lo = -10, a_hi = 10;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a_lo + a_hi);
    double slope = 0;
    for (std::size_t i = 0; i < r.size(); ++i) slope += r[i] * (mid * r[i] - f[i]);
    (slope > 0 ? a_hi : a_lo) = mid;
  }
  CHECK(std::abs(m.mse_scale - 0.5 * (a_lo + a_hi)) <= 1e-9);
  // Ternary search on the convex, piecewise-linear L1 objective.
  double lo = -10, hi = 10;
  for (int it = 0; it < 300; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    (l1(m1) < l1(m2) ? hi : lo) = l1(m1) < l1(m2) ? m2 : m1;
  }
  CHECK(l1(m.mae_scale) <= l1(0.5 * (lo + hi)) + 1e-9);
  CHECK(m.mae == doctest::Approx(l1(m.mae_scale) / 400.0));
  CHECK(m.mse == doctest::Approx(l2(m.mse_scale) / 400.0));
}

TEST_CASE("SSIM matches a window-by-window evaluation") {
  const auto a = oracle::random_vector(32 * 28, 6, 0.0, 1.0);
  auto b = a;
  const auto n = oracle::random_vector(b.size(), 7, -0.2, 0.2);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::max(0.0, b[i] + n[i]);
  const Image ia = image_of(32, 28, a), ib = image_of(32, 28, b);
  const auto fa = to_double(ia.pixels()), fb = to_double(ib.pixels());
  for (std::size_t win : {std::size_t{7}, std::size_t{21}})
    CHECK(ssim(ia, ib, win) == doctest::Approx(oracle::ssim(fa, fb, 32, 28, win)).epsilon(1e-9));
  CHECK(ssim(ib, ib) == doctest::Approx(1.0));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Image r = image_of(32, 28, oracle::random_vector(32 * 28, 20 + seed, -1.0, 1.0));
    CHECK(ssim(r, ib) <= 1.0 + 1e-12);
  }
  CHECK_ERROR(ssim(ia, ib, 40), ErrorCode::invalid_argument);
}

TEST_CASE("NNLS agrees with exhaustive search over active sets") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t rows = 9, cols = 4;
    const auto a = oracle::random_vector(rows * cols, 300 + seed, -1.0, 1.0);
    const auto b = oracle::random_vector(rows, 400 + seed, -1.0, 1.0);
    const auto got = nnls(a, rows, cols, b);
    const auto want = nnls_bruteforce(a, rows, cols, b);
    CHECK(got.converged);
    for (std::size_t c = 0; c < cols; ++c) CHECK(got.x[c] == doctest::Approx(want[c]).epsilon(1e-8).scale(1e-8));
  }
}

TEST_CASE("unmixing recovers non-negative abundances exactly") {
  const auto h = random_spectra(4, 1);
  ImageGrid grid;
  grid.nx = grid.ny = 10;
  auto w = oracle::random_vector(100 * 4, 2, 0.0, 1.0);
  for (std::size_t i = 0; i < w.size(); i += 3) w[i] = 0.0;
  const auto result = unmix_nnls(stack_from(w, h, grid), h);
  REQUIRE(result.n_chromophores() == 4);
  double err = 0.0, ref = 0.0;
  for (std::size_t j = 0; j < 100; ++j)
    for (std::size_t c = 0; c < 4; ++c) {
      err += std::pow(result.at(j, c) - w[j * 4 + c], 2);
      ref += w[j * 4 + c] * w[j * 4 + c];
    }
  CHECK(std::sqrt(err / ref) <= 1e-6);
  const Image comp = result.component_image(2);
  CHECK(comp.at(0, 1) == doctest::Approx(result.at(1, 2)));
}

TEST_CASE("unmixing special stacks") {
  const auto h = random_spectra(4, 3);
  ImageGrid grid;
  grid.nx = grid.ny = 6;
  const auto zero = unmix_nnls(stack_from(std::vector<double>(36 * 4, 0.0), h, grid), h);
  for (double v : zero.components) CHECK(v == 0.0);

  std::vector<double> five(36 * 4, 0.0);
  for (std::size_t j = 0; j < 36; ++j) five[j * 4 + 1] = 5.0;
  const auto single = unmix_nnls(stack_from(five, h, grid), h);
  for (std::size_t j = 0; j < 36; ++j)
    for (std::size_t c = 0; c < 4; ++c)
      // Stack pixels are float32.
      CHECK(std::abs(single.at(j, c) - (c == 1 ? 5.0 : 0.0)) <= 5e-6);
}

TEST_CASE("NNLS objective beats clamped least squares") {
  const auto h = random_spectra(4, 5);
  ImageGrid grid;
  grid.nx = grid.ny = 5;
  MultispectralStack stack;
  stack.wavelengths_nm = h.wavelengths_nm;
  for (std::size_t l = 0; l < h.n_wavelengths(); ++l)
    stack.images.push_back(make_image(grid, oracle::random_vector(25, 700 + l, -0.5, 1.0)));
  const auto res = unmix_nnls(stack, h);
  const std::size_t nl = h.n_wavelengths();
  std::vector<double> a(nl * 4);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t l = 0; l < nl; ++l) a[c * nl + l] = h.at(c, l);
  for (std::size_t j = 0; j < 25; ++j) {
    std::vector<double> b(nl);
    for (std::size_t l = 0; l < nl; ++l) b[l] = stack.images[l].pixels()[j];
    // Unconstrained least squares is the brute force over the full set.
    std::vector<double> ls(4);
    {
      auto full = nnls_bruteforce(a, nl, 4, b);
      ls = full;
    }
    auto objective = [&](const std::vector<double>& x) {
      double e = 0;
      for (std::size_t l = 0; l < nl; ++l) {
        double v = -b[l];
        for (std::size_t c = 0; c < 4; ++c) v += a[c * nl + l] * x[c];
        e += v * v;
      }
      return e;
    };
    std::vector<double> got(4);
    for (std::size_t c = 0; c < 4; ++c) {
      got[c] = res.at(j, c);
      CHECK(got[c] >= 0.0);
    }
    CHECK(objective(got) <= objective(ls) + 1e-12);
  }
}

TEST_CASE("unmixing rejects mismatched wavelengths and dependent spectra") {
  auto h = random_spectra(3, 6);
  ImageGrid grid;
  grid.nx = grid.ny = 4;
  auto stack = stack_from(std::vector<double>(16 * 3, 1.0), h, grid);
  auto shifted = stack;
  shifted.wavelengths_nm[3] += 1.0;
  CHECK_ERROR(unmix_nnls(shifted, h), ErrorCode::dimension_mismatch);
  auto shorter = stack;
  shorter.images.pop_back();
  shorter.wavelengths_nm.pop_back();
  CHECK_ERROR(unmix_nnls(shorter, h), ErrorCode::dimension_mismatch);
  for (std::size_t l = 0; l < h.n_wavelengths(); ++l)
    h.absorption[2 * h.n_wavelengths() + l] = 2.0 * h.at(0, l);
  CHECK_ERROR(unmix_nnls(stack, h), ErrorCode::rank_deficient);
}
