// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_RANDOM_HPP
#define DECOPT_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "decopt/types.hpp"

namespace decopt
{

using Rng = std::mt19937_64;

// Every random draw in a run comes from a stream keyed by (root seed, purpose, client,
// epoch, step). Streams never share state, so e.g. the client-selection sequence does
// not move when the oracle draws more or fewer numbers.
enum class Purpose : std::uint64_t
{
  ClientSelect = 1,
  Interpolation = 2,  // s ~ Unif[0, 1]
  Oracle = 3,         // xi and z draws inside an estimator
  OutputSelect = 4,
  Shard = 5,
  Probe = 6,  // Goldstein-norm smoothing samples
  Data = 7,   // synthetic dataset generation
};

namespace detail
{

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed sequence that fills the whole engine state from a splitmix64 walk. Seeding
// mt19937_64 from a single word leaves nearby streams measurably correlated.
struct HashSeedSeq
{
  using result_type = std::uint32_t;
  std::uint64_t key;

  template <class It>
  void generate(It first, It last) const
  {
    std::uint64_t x = key;
    for (; first != last; ++first)
    {
      x = splitmix64(x);
      *first = static_cast<result_type>(x >> 32);
    }
  }
};

}  // namespace detail

inline Rng make_stream(std::uint64_t seed, Purpose purpose, std::uint64_t client = 0,
                       std::uint64_t epoch = 0, std::uint64_t step = 0)
{
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = detail::splitmix64(h ^ client);
  h = detail::splitmix64(h ^ epoch);
  h = detail::splitmix64(h ^ step);
  detail::HashSeedSeq seq{h};
  return Rng(seq);
}

inline double uniform01(Rng &rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(Rng &rng, std::size_t count)
{
  return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

// Uniform on the unit sphere: normalized standard Gaussian.
inline Vector uniform_sphere(Rng &rng, Eigen::Index d)
{
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector z(d);
  double norm = 0.0;
  do
  {
    for (Eigen::Index j = 0; j < d; ++j)
    {
      z(j) = gauss(rng);
    }
    norm = z.norm();
  } while (norm == 0.0);
  return z / norm;
}

// Uniform in the unit ball: sphere point scaled by U^(1/d).
inline Vector uniform_ball(Rng &rng, Eigen::Index d)
{
  Vector z = uniform_sphere(rng, d);
  const double radius = std::pow(uniform01(rng), 1.0 / static_cast<double>(d));
  return z * radius;
}

}  // namespace decopt

#endif  // DECOPT_RANDOM_HPP
