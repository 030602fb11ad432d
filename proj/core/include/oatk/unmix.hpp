#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oatk/data.hpp"

namespace oatk {

struct NnlsResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active-set solution of min_{x >= 0} ||A x - b||^2 with A
/// column-major [rows x cols]. The dual feasibility tolerance is
/// 1e-10 ||A||_F ||b||; at most 3 cols outer iterations.
NnlsResult nnls(std::span<const double> a_colmajor, std::size_t rows, std::size_t cols,
                std::span<const double> b);

/// argmin_{W >= 0} ||S - W H||_F^2, solved independently per pixel.
/// Throws dimension_mismatch when the stack and spectra wavelengths differ
/// and rank_deficient when the rows of H are linearly dependent.
UnmixResult unmix_nnls(const MultispectralStack& stack, const SpectraMatrix& spectra,
                       bool clamp_negatives = false);

} // namespace oatk
