// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "decopt/gossip.hpp"
#include "decopt/random.hpp"

using namespace decopt;

namespace
{

StackedVectors random_stack(std::uint64_t seed, Eigen::Index n, Eigen::Index d)
{
  Rng rng = make_stream(seed, Purpose::Data);
  std::normal_distribution<double> g;
  StackedVectors z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      z(i, j) = g(rng);
  return z;
}

double dispersion(const StackedVectors &z)
{
  const Eigen::RowVectorXd mean = z.colwise().mean();
  return (z.rowwise() - mean).squaredNorm();
}

}  // namespace

TEST(Gossip, MomentumMatchesClosedForm)
{
  EXPECT_DOUBLE_EQ(chebyshev_momentum(0.0), 0.0);
  const double l = 0.6;
  const double r = std::sqrt(1.0 - l * l);
  EXPECT_NEAR(chebyshev_momentum(l), (1.0 - r) / (1.0 + r), 1e-15);
}

TEST(Gossip, ZeroRoundsIsIdentity)
{
  const auto m = build_ring(8, 1);
  const GossipConfig cfg(m, 0);
  const auto z = random_stack(1, 8, 3);
  EXPECT_EQ(fast_gossip(cfg, z), z);
}

TEST(Gossip, FirstRoundUsesStartAsPrevious)
{
  // z^{-1} = z^0, so z^1 = (1 + phi) P z^0 - phi z^0.
  const auto m = build_ring(8, 2);
  const GossipConfig cfg(m, 1);
  const auto z = random_stack(2, 8, 4);
  const double phi = chebyshev_momentum(m.lambda2());
  EXPECT_GT(phi, 0.0);
  const StackedVectors expect = (1.0 + phi) * (m.weights() * z) - phi * z;
  EXPECT_LT((fast_gossip(cfg, z) - expect).norm(), 1e-13);
}

TEST(Gossip, PreservesMeanAndContracts)
{
  const auto m = build_ring(16, 1);
  const auto z = random_stack(3, 16, 5);
  for (std::size_t r : {1u, 2u, 4u, 8u, 16u})
  {
    const auto out = fast_gossip(GossipConfig(m, r), z);
    EXPECT_LT((out.colwise().mean() - z.colwise().mean()).norm(), 1e-12);
    EXPECT_LE(dispersion(out) / dispersion(z), chebyshev_contraction_bound(m.gamma(), r));
  }
}

TEST(Gossip, ChebyshevBeatsPlainGossipOnPoorlyMixedRing)
{
  const auto m = build_ring(32, 1);
  const auto z = random_stack(4, 32, 2);
  const double fast = dispersion(fast_gossip(GossipConfig(m, 20), z));
  const double plain = dispersion(plain_gossip(m, z, 20));
  EXPECT_LT(fast, plain);
}

TEST(Gossip, PlanRoundsFrozenValue)
{
  // log(sqrt(14 * 16 * 15) * 0.01 / 1e-5) / ((1 - 1/sqrt 2) * 0.5) = 74.891...
  EXPECT_EQ(plan_rounds(0.25, 16, 0.01, 1e-5), 75u);
}

TEST(Gossip, PlanRoundsAtLeastOne)
{
  EXPECT_GE(plan_rounds(1.0, 2, 1.0, 0.999), 1u);
}

TEST(Gossip, PlanRoundsRejectsBadInput)
{
  EXPECT_THROW((void)plan_rounds(0.0, 16, 0.01, 1e-5), ConfigError);
  EXPECT_THROW((void)plan_rounds(1.5, 16, 0.01, 1e-5), ConfigError);
  EXPECT_THROW((void)plan_rounds(0.25, 1, 0.01, 1e-5), ConfigError);
  EXPECT_THROW((void)plan_rounds(0.25, 16, 0.01, 0.01), ConfigError);
  EXPECT_THROW((void)plan_rounds(0.25, 16, 0.0, 1e-5), ConfigError);
}

TEST(Gossip, PlannedRoundsReachTolerance)
{
  // One client holding an update of norm n D; after R planned rounds every client sits
  // within eps' of the mean.
  const auto m = build_ring(16, 1);
  const double D = 0.01, eps = 1e-5;
  const auto R = plan_rounds(m.gamma(), 16, D, eps);
  StackedVectors z = StackedVectors::Zero(16, 3);
  z(5, 0) = 16.0 * D;
  const auto out = fast_gossip(GossipConfig(m, R), z);
  const Eigen::RowVectorXd mean = out.colwise().mean();
  for (Eigen::Index i = 0; i < 16; ++i)
  {
    EXPECT_LE((out.row(i) - mean).norm(), eps);
  }
}

TEST(Gossip, RejectsShapeMismatch)
{
  const auto m = build_ring(8, 1);
  EXPECT_THROW((void)fast_gossip(GossipConfig(m, 2), StackedVectors::Zero(7, 2)), ConfigError);
}
