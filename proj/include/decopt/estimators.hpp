// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_ESTIMATORS_HPP
#define DECOPT_ESTIMATORS_HPP

#include <cstddef>
#include <string>

#include "decopt/error.hpp"
#include "decopt/problem.hpp"
#include "decopt/random.hpp"

namespace decopt
{

enum class OracleType
{
  First,
  Zeroth,
};

inline std::string to_string(OracleType t) { return t == OracleType::First ? "first" : "zeroth"; }

// One stochastic gradient draw. A zeroth-order call is one two-point query made of two
// function evaluations; a first-order call is one query and one gradient evaluation.
struct OracleSample
{
  Vector g;
  std::size_t queries = 1;
  std::size_t evaluations = 1;
  std::size_t sample_index = 0;  // the xi that was drawn
};

// g = grad F_i(w + mu z; xi), xi uniform over the shard, z uniform in the unit ball.
inline OracleSample first_order_estimator(const Problem &p, std::size_t client, const Vector &w,
                                          double mu, Rng &rng)
{
  if (!(mu >= 0.0))
  {
    throw ConfigError("first-order estimator: mu must be nonnegative");
  }
  const std::size_t m = p.shard_size(client);
  if (m == 0)
  {
    throw ConfigError("first-order estimator: empty shard for client " + std::to_string(client));
  }
  OracleSample out;
  out.sample_index = uniform_index(rng, m);
  const Vector z = uniform_ball(rng, static_cast<Eigen::Index>(p.dim()));
  out.g = p.subgradient(client, out.sample_index, w + mu * z);
  return out;
}

// g = d / (2 mu) (F(w + mu z; xi) - F(w - mu z; xi)) z, z uniform on the unit sphere.
inline OracleSample zeroth_order_estimator(const Problem &p, std::size_t client, const Vector &w,
                                           double mu, Rng &rng)
{
  if (!(mu > 0.0))
  {
    throw ConfigError("zeroth-order estimator: mu must be positive");
  }
  const std::size_t m = p.shard_size(client);
  if (m == 0)
  {
    throw ConfigError("zeroth-order estimator: empty shard for client " +
                      std::to_string(client));
  }
  OracleSample out;
  out.evaluations = 2;
  out.sample_index = uniform_index(rng, m);
  const auto d = static_cast<Eigen::Index>(p.dim());
  const Vector z = uniform_sphere(rng, d);
  const double diff =
      p.value(client, out.sample_index, w + mu * z) - p.value(client, out.sample_index, w - mu * z);
  out.g = (static_cast<double>(d) / (2.0 * mu) * diff) * z;
  return out;
}

inline OracleSample estimate(OracleType type, const Problem &p, std::size_t client,
                             const Vector &w, double mu, Rng &rng)
{
  return type == OracleType::First ? first_order_estimator(p, client, w, mu, rng)
                                   : zeroth_order_estimator(p, client, w, mu, rng);
}

}  // namespace decopt

#endif  // DECOPT_ESTIMATORS_HPP
