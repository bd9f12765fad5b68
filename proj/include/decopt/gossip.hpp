// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_GOSSIP_HPP
#define DECOPT_GOSSIP_HPP

#include <cmath>
#include <cstddef>
#include <string>

#include "decopt/error.hpp"
#include "decopt/topology.hpp"
#include "decopt/types.hpp"

namespace decopt
{

// Chebyshev momentum for a mixing matrix with second eigenvalue lambda2.
inline double chebyshev_momentum(double lambda2)
{
  const double root = std::sqrt(1.0 - lambda2 * lambda2);
  return (1.0 - root) / (1.0 + root);
}

//
// Multi-round gossip configuration. phi is derived from the matrix and never set by
// hand. The matrix is referenced, not owned.
//
class GossipConfig
{
public:
  GossipConfig(const MixingMatrix &matrix, std::size_t rounds)
    : matrix_(&matrix), rounds_(rounds), phi_(chebyshev_momentum(matrix.lambda2()))
  {
  }

  const MixingMatrix &matrix() const { return *matrix_; }
  std::size_t rounds() const { return rounds_; }
  double phi() const { return phi_; }

private:
  const MixingMatrix *matrix_;
  std::size_t rounds_;
  double phi_;
};

namespace detail
{

inline void check_stacked(const MixingMatrix &m, const StackedVectors &z)
{
  if (static_cast<std::size_t>(z.rows()) != m.size())
  {
    throw ConfigError("gossip: got vectors for " + std::to_string(z.rows()) +
                      " clients, mixing matrix has " + std::to_string(m.size()));
  }
}

}  // namespace detail

// Chebyshev-accelerated gossip:
//   z^(r+1) = (1 + phi) P z^(r) - phi z^(r-1),  z^(-1) = z^(0).
// Each round reads only the two previous iterates, so the per-client updates of a
// round are independent.
inline StackedVectors fast_gossip(const GossipConfig &cfg, const StackedVectors &z)
{
  detail::check_stacked(cfg.matrix(), z);
  if (cfg.rounds() == 0)
  {
    return z;
  }
  const DenseMatrix &p = cfg.matrix().weights();
  const double phi = cfg.phi();
  StackedVectors prev = z;
  StackedVectors cur = z;
  StackedVectors next(z.rows(), z.cols());
  for (std::size_t r = 0; r < cfg.rounds(); ++r)
  {
    next.noalias() = p * cur;
    next *= (1.0 + phi);
    next.noalias() -= phi * prev;
    prev.swap(cur);
    cur.swap(next);
  }
  return cur;
}

inline StackedVectors plain_gossip(const MixingMatrix &m, const StackedVectors &z,
                                   std::size_t rounds)
{
  detail::check_stacked(m, z);
  StackedVectors cur = z;
  StackedVectors next(z.rows(), z.cols());
  for (std::size_t r = 0; r < rounds; ++r)
  {
    next.noalias() = m.weights() * cur;
    cur.swap(next);
  }
  return cur;
}

// Rounds needed so that one client's update, spread by gossip, leaves every client
// within eps_prime of the mean:
//   R = ceil( log(sqrt(14 n (n-1)) D / eps') / ((1 - 1/sqrt 2) sqrt(gamma)) ), R >= 1.
inline std::size_t plan_rounds(double gamma, std::size_t n, double clip_radius, double eps_prime)
{
  if (!(gamma > 0.0 && gamma <= 1.0))
  {
    throw ConfigError("plan_rounds: gamma must lie in (0, 1]");
  }
  if (n < 2)
  {
    throw ConfigError("plan_rounds: need at least 2 clients");
  }
  if (!(clip_radius > 0.0))
  {
    throw ConfigError("plan_rounds: D must be positive");
  }
  if (!(eps_prime > 0.0 && eps_prime < clip_radius))
  {
    throw ConfigError("plan_rounds: eps_prime must satisfy 0 < eps_prime < D");
  }
  const double nn = static_cast<double>(n);
  const double rate = (1.0 - 1.0 / std::sqrt(2.0)) * std::sqrt(gamma);
  const double raw = std::log(std::sqrt(14.0 * nn * (nn - 1.0)) * clip_radius / eps_prime) / rate;
  const double r = std::ceil(raw);
  return r < 1.0 ? 1 : static_cast<std::size_t>(r);
}

// Right-hand side of the Chebyshev contraction bound: 14 (1 - (1 - 1/sqrt 2) sqrt gamma)^(2R).
inline double chebyshev_contraction_bound(double gamma, std::size_t rounds)
{
  const double c = 1.0 - (1.0 - 1.0 / std::sqrt(2.0)) * std::sqrt(gamma);
  return 14.0 * std::pow(c, 2.0 * static_cast<double>(rounds));
}

}  // namespace decopt

#endif  // DECOPT_GOSSIP_HPP
