#include "oatk/unmix.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "oatk/error.hpp"

namespace oatk {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Least squares restricted to the passive columns; entries outside stay 0.
Vector passive_solve(const Matrix& a, const Vector& b, const std::vector<bool>& passive) {
  std::vector<Eigen::Index> cols;
  for (std::size_t j = 0; j < passive.size(); ++j)
    if (passive[j]) cols.push_back(static_cast<Eigen::Index>(j));
  Matrix sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
  const Vector zs = sub.colPivHouseholderQr().solve(b);
  Vector z = Vector::Zero(a.cols());
  for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zs(static_cast<Eigen::Index>(k));
  return z;
}

NnlsResult solve(const Matrix& a, const Vector& b) {
  const auto n = static_cast<std::size_t>(a.cols());
  NnlsResult out;
  out.x.assign(n, 0.0);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  const double tol = 1e-10 * a.norm() * bnorm;
  Vector x = Vector::Zero(a.cols());
  std::vector<bool> passive(n, false);
  const std::size_t max_outer = 3 * n;

  for (; out.iterations < max_outer; ++out.iterations) {
    const Vector w = a.transpose() * (b - a * x);
    Eigen::Index t = -1;
    double best = tol;
    for (std::size_t j = 0; j < n; ++j)
      if (!passive[j] && w(static_cast<Eigen::Index>(j)) > best) {
        best = w(static_cast<Eigen::Index>(j));
        t = static_cast<Eigen::Index>(j);
      }
    if (t < 0) {
      out.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(t)] = true;

    for (std::size_t inner = 0; inner <= n; ++inner) {
      const Vector z = passive_solve(a, b, passive);
      bool feasible = true;
      double alpha = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (passive[j] && z(jj) <= 0.0) {
          feasible = false;
          const double denom = x(jj) - z(jj);
          if (denom > 0.0) alpha = std::min(alpha, x(jj) / denom);
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (passive[j] && x(jj) <= tol * 1e-3 / std::max(a.norm(), 1.0)) {
          passive[j] = false;
          x(jj) = 0.0;
        }
      }
    }
  }
  // Last dual check when the budget ran out exactly at optimality.
  if (!out.converged) {
    const Vector w = a.transpose() * (b - a * x);
    out.converged = true;
    for (std::size_t j = 0; j < n; ++j)
      if (!passive[j] && w(static_cast<Eigen::Index>(j)) > tol) out.converged = false;
  }
  for (std::size_t j = 0; j < n; ++j) out.x[j] = std::max(x(static_cast<Eigen::Index>(j)), 0.0);
  return out;
}

} // namespace

NnlsResult nnls(std::span<const double> a_colmajor, std::size_t rows, std::size_t cols,
                std::span<const double> b) {
  require(rows > 0 && cols > 0 && a_colmajor.size() == rows * cols && b.size() == rows,
          ErrorCode::dimension_mismatch, "nnls: inconsistent sizes");
  const Matrix a = Eigen::Map<const Matrix>(a_colmajor.data(), static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(cols));
  const Vector bv = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(rows));
  return solve(a, bv);
}

UnmixResult unmix_nnls(const MultispectralStack& stack, const SpectraMatrix& spectra,
                       bool clamp_negatives) {
  stack.validate();
  spectra.validate();
  const std::size_t n_wl = spectra.n_wavelengths();
  const std::size_t n_chrom = spectra.n_chromophores();
  require(stack.wavelengths_nm.size() == n_wl, ErrorCode::dimension_mismatch,
          "unmix: stack and spectra have different wavelength counts");
  for (std::size_t w = 0; w < n_wl; ++w)
    require(std::abs(stack.wavelengths_nm[w] - spectra.wavelengths_nm[w]) <= 1e-6,
            ErrorCode::dimension_mismatch, "unmix: stack and spectra wavelengths differ");

  // Per pixel: s (n_wl) = H^T w (n_chrom).
  Matrix a(static_cast<Eigen::Index>(n_wl), static_cast<Eigen::Index>(n_chrom));
  for (std::size_t c = 0; c < n_chrom; ++c)
    for (std::size_t w = 0; w < n_wl; ++w)
      a(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(c)) = spectra.at(c, w);
  const auto qr = a.colPivHouseholderQr();
  require(static_cast<std::size_t>(qr.rank()) == n_chrom, ErrorCode::rank_deficient,
          "unmix: spectra rows are linearly dependent");

  const std::size_t n_pix = stack.n_pixels();
  UnmixResult out{stack.images.front().grid(), spectra.chromophores,
                  std::vector<double>(n_pix * n_chrom, 0.0)};
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pi = 0; pi < static_cast<std::ptrdiff_t>(n_pix); ++pi) {
    const auto p = static_cast<std::size_t>(pi);
    Vector b(static_cast<Eigen::Index>(n_wl));
    for (std::size_t w = 0; w < n_wl; ++w) {
      const double v = stack.images[w].pixels()[p];
      b(static_cast<Eigen::Index>(w)) = clamp_negatives ? std::max(v, 0.0) : v;
    }
    const auto r = solve(a, b);
    std::copy(r.x.begin(), r.x.end(), out.components.begin() + static_cast<std::ptrdiff_t>(p * n_chrom));
  }
  return out;
}

} // namespace oatk
