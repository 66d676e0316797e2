#include "evovox/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace evovox {

std::size_t RandomSource::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t span = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<std::size_t>(x % span);
}

double RandomSource::gaussian(double mean, double sigma) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + sigma * spare_;
  }
  double u, v, s;
  do {
    u = uniform(-1.0, 1.0);
    v = uniform(-1.0, 1.0);
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return mean + sigma * u * f;
}

std::string RandomSource::save_state() const {
  std::ostringstream os;
  os << seed_ << ' ' << engine_ << ' ' << (has_spare_ ? 1 : 0);
  if (has_spare_) {
    os << ' ';
    os.precision(17);
    os << spare_;
  }
  return os.str();
}

void RandomSource::restore_state(const std::string& state) {
  std::istringstream is(state);
  int spare_flag = 0;
  is >> seed_ >> engine_ >> spare_flag;
  has_spare_ = spare_flag != 0;
  spare_ = 0.0;
  if (has_spare_) is >> spare_;
  if (is.fail()) throw std::invalid_argument("RandomSource: malformed state string");
}

}  // namespace evovox
