#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace choicekit {

// All randomness flows through mt19937_64 plus the fixed transforms below.
// The standard pins the engine's output exactly, and the transforms avoid
// std::*_distribution (whose sequences vary between library implementations),
// so a seed reproduces byte-identical artifacts on any platform.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent seed for stream `stream` of a master seed. Parallel
// workers seeded this way produce results independent of scheduling order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b);

std::uint64_t fnv1a64(std::string_view s);

// Uniform in [0, 1), 53-bit resolution.
double uniform_double(Rng& rng);

// Uniform in [lo, hi).
double uniform_range(Rng& rng, double lo, double hi);

// Uniform integer in [0, n), rejection sampled so every value is equally
// likely. n must be nonzero.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

// Normal draw via Box-Muller; consumes exactly two engine values.
double normal(Rng& rng, double mean, double sigma);

}  // namespace choicekit
