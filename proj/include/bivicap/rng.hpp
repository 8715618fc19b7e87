#pragma once

#include <cstdint>
#include <random>

#include "bivicap/matrix.hpp"

namespace bivicap {

/// Seeded generator with self-contained distribution mappings, so identical
/// seeds yield identical streams on every platform (std distributions are
/// implementation-defined; the mt19937_64 core is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive, unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal via Box-Muller (one spare cached per pair).
  double gaussian();

  /// Independent child generator for a named stream.
  Rng fork(std::uint64_t stream) {
    return Rng(gen_() ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

enum class InitScheme { uniform_scaled, zeros };

/// uniform_scaled draws U(-s, s) with s = sqrt(6/(rows+cols)); zeros for biases.
Matrix init_matrix(Rng& rng, int rows, int cols, InitScheme scheme);

}  // namespace bivicap
