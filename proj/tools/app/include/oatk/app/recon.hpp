#pragma once

#include <cstdint>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "oatk/app/config.hpp"
#include "oatk/data.hpp"
#include "oatk/shearlet.hpp"
#include "oatk/sparsa.hpp"

namespace oatk::app {

enum class ReconMethod { bp, dmas, mb, delay };

/// "bp", "dmas", "mb" or "delay"; otherwise invalid_argument.
ReconMethod parse_method(std::string_view name);
std::string_view to_string(ReconMethod method) noexcept;

struct ReconRequest {
  ReconMethod method = ReconMethod::bp;
  double sos_mps = 1500.0;
  /// Overrides config.mb.lambda for mb.
  std::optional<double> lambda;
  bool lambda_auto = false;
};

struct ReconOutcome {
  Image image;
  /// residual_norm with clamping and optimal scaling, for every method;
  /// unset when the sinogram is zero on every reachable bin.
  std::optional<double> residual_norm;
  double elapsed_ms = 0.0;
  double sos_used = 0.0;
  std::optional<SolveReport> report;
};

/// The single reconstruction path shared by the CLI, the service and the
/// benchmark. `shearlets` may be null (built on demand for mb).
ReconOutcome run_recon(const EngineConfig& config, const Sinogram& sinogram,
                       const ReconRequest& request, std::stop_token stop = {},
                       const ShearletSystem* shearlets = nullptr);

/// key=value lines of a solve report.
std::string format_report(const SolveReport& report);

/// 8-bit grayscale PNG of the image windowed to [0, max] (all-dark when
/// max <= 0).
std::vector<std::uint8_t> preview_png(const Image& image);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

} // namespace oatk::app
