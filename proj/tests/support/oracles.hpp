// SPDX-License-Identifier: Apache-2.0
//
// Reference computations used by the tests. Nothing here calls into the code under test
// except where noted (the n = 1 loop reuses the estimators and RNG streams on purpose).

#ifndef DECOPT_TESTS_ORACLES_HPP
#define DECOPT_TESTS_ORACLES_HPP

#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "decopt/estimators.hpp"
#include "decopt/planner.hpp"
#include "decopt/problem.hpp"
#include "decopt/random.hpp"

namespace oracle
{

using decopt::Vector;

// P(s <= t) for s = u^T e, u uniform in the unit d-ball and e a unit vector.
// s has density proportional to (1 - s^2)^((d-1)/2), i.e. (s + 1) / 2 ~ Beta((d+1)/2, (d+1)/2).
inline double ball_projection_cdf(double t, std::size_t d)
{
  if (t <= -1.0)
    return 0.0;
  if (t >= 1.0)
    return 1.0;
  const double a = 0.5 * (static_cast<double>(d) + 1.0);
  return boost::math::ibeta(a, a, 0.5 * (t + 1.0));
}

// E sign(a + r s) with s distributed as above.
inline double expected_sign(double a, double r, std::size_t d)
{
  if (r == 0.0)
    return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  return 1.0 - 2.0 * ball_projection_cdf(-a / r, d);
}

// Gradient of the mu-ball smoothing of |c^T x + e| + max(a1^T x + b1, a2^T x + b2).
inline Vector smoothed_gradient(const decopt::PiecewiseSample &p, const Vector &x, double mu)
{
  const auto d = static_cast<std::size_t>(x.size());
  const Vector diff = p.a1 - p.a2;
  const double q = diff.dot(x) + p.b1 - p.b2;
  Vector g = p.c * expected_sign(p.c.dot(x) + p.e, mu * p.c.norm(), d);
  g += 0.5 * (p.a1 + p.a2) + 0.5 * diff * expected_sign(q, mu * diff.norm(), d);
  return g;
}

// Shard average of the smoothed gradients.
inline Vector smoothed_local_gradient(const decopt::PiecewiseProblem &prob, std::size_t client,
                                      const Vector &x, double mu)
{
  Vector g = Vector::Zero(x.size());
  const auto m = prob.shard_size(client);
  for (std::size_t j = 0; j < m; ++j)
  {
    g += smoothed_gradient(prob.sample(client, j), x, mu);
  }
  return g / static_cast<double>(m);
}

// argmin_{|x| <= D} <x, g> + |x - delta|^2 / (2 eta), by projected gradient with step eta/2
// (contraction factor 1/2 per iteration).
inline Vector ball_prox_minimizer(const Vector &delta, const Vector &g, double eta, double D)
{
  Vector x = Vector::Zero(delta.size());
  for (int it = 0; it < 200; ++it)
  {
    const Vector grad = g + (x - delta) / eta;
    Vector next = x - 0.5 * eta * grad;
    const double nn = next.norm();
    if (nn > D)
      next *= D / nn;
    if ((next - x).norm() == 0.0)
      break;
    x = next;
  }
  return x;
}

struct ReferenceTrajectory
{
  std::vector<Vector> w, y, delta;
};

// Single-client loop written directly from the method description with n = 1:
// x = y + delta, w = y + s delta, y = x, delta = clip_D(delta - eta g(w)).
inline ReferenceTrajectory single_client_reference(const decopt::RunPlan &plan,
                                                   const decopt::Problem &prob)
{
  using namespace decopt;
  ReferenceTrajectory tr;
  const auto d = static_cast<Eigen::Index>(plan.d);
  Vector y = Vector::Zero(d);
  for (std::size_t k = 1; k <= plan.K; ++k)
  {
    Vector delta = Vector::Zero(d);
    for (std::size_t t = 1; t <= plan.T; ++t)
    {
      Rng srng = make_stream(plan.seed, Purpose::Interpolation, 0, k, t);
      const double s = uniform01(srng);
      const Vector w = y + s * delta;
      const Vector x = y + delta;
      y = x;
      Rng orng = make_stream(plan.seed, Purpose::Oracle, 0, k, t);
      const OracleSample g = estimate(plan.oracle, prob, 0, w, plan.delta_prime, orng);
      Vector v = delta - plan.eta * g.g;
      const double nv = v.norm();
      if (nv > plan.D)
        v *= plan.D / nv;
      delta = v;
      tr.w.push_back(w);
      tr.y.push_back(y);
      tr.delta.push_back(delta);
    }
  }
  return tr;
}

}  // namespace oracle

#endif  // DECOPT_TESTS_ORACLES_HPP
