#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rssloc {

/// The random stream used throughout. Any 64-bit UniformRandomBitGenerator works
/// with the templated entry points; this is the concrete default.
using Stream = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic child seed from a parent seed and a list of keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k));
  return h;
}

inline std::uint64_t key_of(double v) { return std::bit_cast<std::uint64_t>(v); }

inline Stream make_stream(std::uint64_t seed) { return Stream(seed); }

/// Uniform on [0, 1) from the top 53 bits of one engine output. Implemented here
/// rather than via std::uniform_real_distribution so streams are identical across
/// standard libraries.
template <std::uniform_random_bit_generator Urbg>
double uniform01(Urbg& rng) {
  static_assert(Urbg::max() - Urbg::min() == ~std::uint64_t{0}, "needs a full 64-bit engine");
  return static_cast<double>((rng() - Urbg::min()) >> 11) * 0x1.0p-53;
}

/// Uniform on [-1, 1).
template <std::uniform_random_bit_generator Urbg>
double uniform_signed(Urbg& rng) {
  return 2.0 * uniform01(rng) - 1.0;
}

/// Standard normal variate (polar Marsaglia, no cached spare, so one call is one draw).
template <std::uniform_random_bit_generator Urbg>
double standard_normal(Urbg& rng) {
  for (;;) {
    const double u = uniform_signed(rng);
    const double v = uniform_signed(rng);
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace rssloc
