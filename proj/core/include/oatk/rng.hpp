#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace oatk {

/// Advances `state` and returns the next splitmix64 output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seeded generator whose draws are identical on every platform: uniform
/// doubles take the top 53 bits of mt19937_64, normals use Box-Muller.
/// Independent streams come from (seed, stream) so item i of a dataset
/// draws the same values whatever order items are produced in.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits() { return engine_(); }
  /// [0, 1)
  double uniform();
  /// [lo, hi)
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n), n > 0, without modulo bias.
  std::size_t index(std::size_t n);
  double normal();

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace oatk
