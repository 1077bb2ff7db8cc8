#ifndef EBHMM_RANDOM_HPP
#define EBHMM_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ebhmm/types.hpp"

// Portable sampling helpers. std::*_distribution output is
// implementation-defined, so everything random in this library goes through
// these functions to keep artifacts byte-identical for a given seed.
namespace ebhmm::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream for item `index` under a master seed.
inline Engine derived_engine(std::uint64_t seed, std::uint64_t index) {
  return Engine(splitmix64(seed ^ splitmix64(index + 1)));
}

// Uniform in [0, 1) with 53-bit resolution.
inline double uniform(Engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n), rejection sampled.
inline std::size_t uniform_index(Engine& g, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = g();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

// Standard normal via Box-Muller.
inline double normal(Engine& g) {
  double u1 = uniform(g);
  while (u1 <= 0.0) u1 = uniform(g);
  const double u2 = uniform(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double normal(Engine& g, double mu, double sigma) {
  return mu + sigma * normal(g);
}

// Fisher-Yates shuffle.
template <class T>
void shuffle(std::vector<T>& v, Engine& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(g, i)]);
  }
}

// Draw an index from a discrete distribution by CDF inversion.
// Weights need not be exactly normalised.
inline Index discrete(Engine& g, const Vector& weights) {
  const double u = uniform(g) * weights.sum();
  double acc = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace ebhmm::rng

#endif
