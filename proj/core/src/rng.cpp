#include "choicekit/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace choicekit {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b) {
  return mix_seed(mix_seed(seed, stream_a), stream_b);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

double uniform_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_range(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_double(rng);
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  // Reject the top partial block of the 2^64 range.
  std::uint64_t x, r;
  do {
    x = rng();
    r = x % n;
  } while (x - r > std::uint64_t(0) - n);
  return r;
}

double normal(Rng& rng, double mean, double sigma) {
  double u1 = 1.0 - uniform_double(rng);  // (0, 1], keeps log finite
  double u2 = uniform_double(rng);
  double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + sigma * z;
}

}  // namespace choicekit
