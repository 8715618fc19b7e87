#include "bivicap/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bivicap {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi)
    throw std::invalid_argument("uniform_int: empty range [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(gen_());  // full 64-bit span
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % range);
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

Matrix init_matrix(Rng& rng, int rows, int cols, InitScheme scheme) {
  if (rows < 1 || cols < 1)
    throw ShapeError("init_matrix: non-positive dims " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  Matrix m(rows, cols);
  if (scheme == InitScheme::uniform_scaled) {
    const double s = std::sqrt(6.0 / (rows + cols));
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(-s, s);
  }
  return m;
}

}  // namespace bivicap
