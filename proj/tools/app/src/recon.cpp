#include "oatk/app/recon.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "oatk/delay.hpp"
#include "oatk/direct_recon.hpp"
#include "oatk/error.hpp"
#include "oatk/forward_model.hpp"
#include "oatk/lcurve.hpp"
#include "oatk/metrics.hpp"

namespace oatk::app {

ReconMethod parse_method(std::string_view name) {
  if (name == "bp") return ReconMethod::bp;
  if (name == "dmas") return ReconMethod::dmas;
  if (name == "mb") return ReconMethod::mb;
  if (name == "delay") return ReconMethod::delay;
  fail(ErrorCode::invalid_argument, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(ReconMethod method) noexcept {
  switch (method) {
  case ReconMethod::bp: return "bp";
  case ReconMethod::dmas: return "dmas";
  case ReconMethod::mb: return "mb";
  case ReconMethod::delay: return "delay";
  }
  return "?";
}

ReconOutcome run_recon(const EngineConfig& config, const Sinogram& sinogram,
                       const ReconRequest& request, std::stop_token stop,
                       const ShearletSystem* shearlets) {
  const auto start = std::chrono::steady_clock::now();
  const ForwardOperator op(sinogram.geometry(), config.image, request.sos_mps, config.eir);
  ReconOutcome out;
  out.sos_used = request.sos_mps;
  switch (request.method) {
  case ReconMethod::bp: out.image = backproject(sinogram, config.image, request.sos_mps); break;
  case ReconMethod::dmas: out.image = dmas_cf(sinogram, config.image, request.sos_mps); break;
  case ReconMethod::delay:
    out.image = delay_transform_summed(sinogram, config.image, request.sos_mps);
    break;
  case ReconMethod::mb: {
    MbConfig mb = config.mb;
    if (request.lambda_auto) mb.lambda.reset();
    else if (request.lambda) mb.lambda = request.lambda;
    SolveOptions options;
    options.shearlets = shearlets;
    options.stop = stop;
    auto result = reconstruct_mb(op, sinogram, mb, options);
    out.image = std::move(result.image);
    out.report = std::move(result.report);
    break;
  }
  }
  if (out.report) {
    if (!std::isnan(out.report->residual_norm_R)) out.residual_norm = out.report->residual_norm_R;
  } else {
    try {
      out.residual_norm = residual_norm(op, out.image, sinogram);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate) throw;
    }
  }
  out.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string format_report(const SolveReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "lambda=" << r.lambda << '\n'
     << "iterations=" << r.iterations_run << '\n'
     << "converged=" << (r.converged ? "true" : "false") << '\n'
     << "stop_reason=" << r.stop_reason << '\n'
     << "residual_norm=" << r.residual_norm_R << '\n'
     << "objective_trace=";
  for (std::size_t i = 0; i < r.objective_trace.size(); ++i)
    os << (i ? "," : "") << r.objective_trace[i];
  os << '\n';
  return os.str();
}

std::vector<std::uint8_t> preview_png(const Image& image) {
  const auto px = image.pixels();
  const float peak = px.empty() ? 0.0f : *std::max_element(px.begin(), px.end());
  cv::Mat gray(static_cast<int>(image.ny()), static_cast<int>(image.nx()), CV_8UC1);
  for (std::size_t r = 0; r < image.ny(); ++r)
    for (std::size_t c = 0; c < image.nx(); ++c) {
      const double v = peak > 0.0f ? std::clamp(image.at(r, c) / peak, 0.0f, 1.0f) : 0.0;
      gray.at<std::uint8_t>(static_cast<int>(r), static_cast<int>(c)) =
          static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
  std::vector<std::uint8_t> png;
  require(cv::imencode(".png", gray, png), ErrorCode::io, "preview: PNG encoding failed");
  return png;
}

namespace {
constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::uint32_t n = (std::uint32_t{bytes[i]} << 16) |
                            (i + 1 < bytes.size() ? std::uint32_t{bytes[i + 1]} << 8 : 0) |
                            (i + 2 < bytes.size() ? std::uint32_t{bytes[i + 2]} : 0);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(n >> 6) & 63] : '=';
    out += i + 2 < bytes.size() ? kAlphabet[n & 63] : '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::array<int, 256> value{};
  value.fill(-1);
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) value[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
  require(text.size() % 4 == 0, ErrorCode::parse, "base64: length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t n = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      int v = 0;
      if (ch == '=' && i + 4 == text.size() && k >= 2) ++pad;
      else {
        require(pad == 0, ErrorCode::parse, "base64: data after padding");
        v = value[static_cast<unsigned char>(ch)];
        require(v >= 0, ErrorCode::parse, "base64: invalid character");
      }
      n = (n << 6) | static_cast<std::uint32_t>(v);
    }
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
  }
  return out;
}

} // namespace oatk::app
