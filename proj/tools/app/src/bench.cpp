#include "oatk/app/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "oatk/error.hpp"

namespace oatk::app {

double percentile(std::vector<double> values, double q) {
  require(!values.empty() && q > 0.0 && q <= 1.0, ErrorCode::invalid_argument,
          "percentile: need values and q in (0, 1]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

BenchReport summarize(std::string method, std::vector<double> latencies_ms, double wall_ms) {
  BenchReport r;
  r.method = std::move(method);
  r.n_frames = latencies_ms.size();
  if (!latencies_ms.empty()) {
    r.mean_ms = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) /
                static_cast<double>(latencies_ms.size());
    r.p50_ms = percentile(latencies_ms, 0.50);
    r.p95_ms = percentile(latencies_ms, 0.95);
    r.budget_met = r.p95_ms <= kFrameBudgetMs;
  }
  r.frames_per_second = wall_ms > 0.0 ? 1000.0 * static_cast<double>(r.n_frames) / wall_ms : 0.0;
  r.latencies_ms = std::move(latencies_ms);
  return r;
}

BenchReport bench_stream(const EngineConfig& config, std::span<const Sinogram> frames,
                         const ReconRequest& request, std::size_t n_frames, bool pace) {
  require(n_frames >= 1, ErrorCode::invalid_argument, "bench: need at least one frame");
  require(!frames.empty(), ErrorCode::invalid_argument, "bench: no input frames");
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto period = std::chrono::duration<double, std::milli>(kFrameBudgetMs);
  std::vector<double> latencies;
  latencies.reserve(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) {
    if (pace) std::this_thread::sleep_until(start + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(k)));
    const auto t = clock::now();
    (void)run_recon(config, frames[k % frames.size()], request);
    latencies.push_back(std::chrono::duration<double, std::milli>(clock::now() - t).count());
  }
  const double wall = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return summarize(std::string(to_string(request.method)), std::move(latencies), wall);
}

std::string format_bench(const BenchReport& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "method=" << r.method << '\n'
     << "frames=" << r.n_frames << '\n'
     << "mean_ms=" << r.mean_ms << '\n'
     << "p50_ms=" << r.p50_ms << '\n'
     << "p95_ms=" << r.p95_ms << '\n'
     << "fps=" << r.frames_per_second << '\n'
     << "budget_40ms=" << (r.budget_met ? "met" : "missed") << '\n';
  return os.str();
}

} // namespace oatk::app
