#include "cas4dl/random.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cas4dl {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, StreamPurpose purpose, std::uint64_t trial,
                          std::uint64_t method, std::uint64_t stage) {
  std::uint64_t h = mix64(base);
  h = mix64(h ^ static_cast<std::uint64_t>(purpose));
  h = mix64(h ^ (trial + 0x100000000ULL));
  h = mix64(h ^ (method + 0x200000000ULL));
  h = mix64(h ^ (stage + 0x300000000ULL));
  return h;
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  if ((n & (n - 1)) == 0) return engine_() & (n - 1);
  // Rejection on the smallest covering power of two keeps the draw exact.
  const std::uint64_t mask = std::bit_ceil(n) - 1;
  for (;;) {
    const std::uint64_t r = engine_() & mask;
    if (r < n) return r;
  }
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::string RandomStream::serialize() const {
  std::ostringstream os;
  os.precision(17);
  os << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << std::hexfloat << spare_;
  return os.str();
}

RandomStream RandomStream::deserialize(const std::string& state) {
  RandomStream stream;
  std::istringstream is(state);
  int spare_flag = 0;
  std::string spare_text;
  is >> stream.engine_ >> spare_flag >> spare_text;
  if (!is && !is.eof()) throw std::runtime_error("corrupt random stream state");
  stream.has_spare_ = spare_flag != 0;
  stream.spare_ = std::strtod(spare_text.c_str(), nullptr);
  return stream;
}

}  // namespace cas4dl
