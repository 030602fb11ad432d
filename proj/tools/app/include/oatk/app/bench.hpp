#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "oatk/app/config.hpp"
#include "oatk/app/recon.hpp"

namespace oatk::app {

/// 25 Hz acquisition: one frame every 40 ms.
inline constexpr double kFrameBudgetMs = 40.0;

struct BenchReport {
  std::string method;
  std::size_t n_frames = 0;
  std::vector<double> latencies_ms;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double frames_per_second = 0.0;
  /// p95 <= 40 ms.
  bool budget_met = false;
};

/// Nearest-rank percentile (q in (0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Summary statistics of measured latencies over a wall-clock span.
BenchReport summarize(std::string method, std::vector<double> latencies_ms, double wall_ms);

/// Reconstructs `n_frames` frames, cycling through `frames`. With pacing
/// on, frame k starts no earlier than k * 40 ms after the first.
BenchReport bench_stream(const EngineConfig& config, std::span<const Sinogram> frames,
                         const ReconRequest& request, std::size_t n_frames, bool pace = true);

std::string format_bench(const BenchReport& report);

} // namespace oatk::app
