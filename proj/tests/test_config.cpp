// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include <gtest/gtest.h>

#include "decopt/config.hpp"

using namespace decopt;

namespace
{

ExperimentConfig parse(const std::string &text)
{
  std::istringstream in(text);
  return parse_config_text(in);
}

std::string error_of(const std::string &text)
{
  try
  {
    (void)parse(text);
  }
  catch (const ConfigError &e)
  {
    return e.what();
  }
  return "";
}

const char *kFull = R"(# grid sweep
[problem]
kind = capped_l1_svm
samples = 8000
lambda = 1.25e-9
alpha = 2
data_seed = 4

[topology]
kind = ring
n = 16
neighbors_per_side = 1

[algorithm]
method = docs
oracle = first
delta = 0.1
epsilon = 0.1
eta = 0.001, 0.005, 0.01
D = 0.05, 0.01, 0.005
R = 2
K = 20
T = 200
eps_prime = 0.001
selector = per_client

[run]
seeds = 1, 2, 3
cadence = 50
probe = mean_of_clients
output_dir = out/grid
)";

}  // namespace

TEST(Config, MinimalUsesDefaults)
{
  const auto c = parse("[algorithm]\ndelta = 0.2\n");
  EXPECT_EQ(c.problem.kind, "capped_l1_svm");
  EXPECT_EQ(c.topology.kind, "ring");
  EXPECT_EQ(c.topology.n, 16u);
  EXPECT_DOUBLE_EQ(c.algorithm.delta, 0.2);
  EXPECT_FALSE(c.algorithm.delta_prime.has_value());
  EXPECT_TRUE(c.algorithm.eta.empty());
  EXPECT_EQ(c.run.seeds, std::vector<std::uint64_t>{0});
  EXPECT_EQ(c.run.goldstein_samples, 64u);
  EXPECT_EQ(c.run.final_goldstein_samples, 4096u);
  EXPECT_EQ(c.run.probe, ProbePolicy::AllClients);
}

TEST(Config, FullParse)
{
  const auto c = parse(kFull);
  EXPECT_EQ(c.algorithm.eta, (std::vector<double>{0.001, 0.005, 0.01}));
  EXPECT_EQ(c.algorithm.D, (std::vector<double>{0.05, 0.01, 0.005}));
  EXPECT_EQ(*c.algorithm.R, 2u);
  EXPECT_EQ(c.algorithm.selector, OutputSelector::PerClient);
  EXPECT_EQ(c.run.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(c.run.probe, ProbePolicy::MeanOfClients);
  EXPECT_EQ(c.run.output_dir, "out/grid");
  EXPECT_DOUBLE_EQ(*c.problem.lambda, 1.25e-9);
}

TEST(Config, RoundTrip)
{
  for (const std::string &text : {std::string(kFull), std::string("[run]\nseeds = 9\n"),
                                 std::string("[algorithm]\noracle = zeroth\nmethod = baseline\n"
                                             "delta_prime = 0.3\nL = 1.5\nG = 2\nsigma = 0.1\n"
                                             "[topology]\nkind = file\npath = w.txt\n")})
  {
    const auto c = parse(text);
    const auto again = parse(serialize_config(c));
    EXPECT_EQ(again, c);
    EXPECT_EQ(serialize_config(again), serialize_config(c));
  }
}

TEST(Config, ErrorsNameTheKey)
{
  EXPECT_NE(error_of("[algorithm]\nstep = 1\n").find("algorithm.step"), std::string::npos);
  EXPECT_NE(error_of("[topology]\nn = four\n").find("topology.n"), std::string::npos);
  EXPECT_NE(error_of("[algorithm]\ndelta = -1\n").find("algorithm.delta"), std::string::npos);
  EXPECT_NE(error_of("[algorithm]\noracle = second\n").find("algorithm.oracle"), std::string::npos);
  EXPECT_NE(error_of("[run]\nseeds = 1, x\n").find("run.seeds"), std::string::npos);
  EXPECT_NE(error_of("[run]\nseeds =\n").find("run.seeds"), std::string::npos);
  EXPECT_NE(error_of("[run]\ncadence = 1\ncadence = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("[bogus]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(error_of("n = 3\n").find("outside"), std::string::npos);
  EXPECT_NE(error_of("[topology]\nkind = file\n").find("topology.path"), std::string::npos);
}

TEST(Config, EpsPrimeNotBelowDIsRejected)
{
  const auto msg = error_of("[algorithm]\nD = 0.01\neps_prime = 0.01\n");
  EXPECT_NE(msg.find("algorithm.eps_prime"), std::string::npos);
  EXPECT_NE(msg.find("eps' < D"), std::string::npos);
  EXPECT_EQ(error_of("[algorithm]\nD = 0.01\neps_prime = 0.001\n"), "");
}

TEST(Config, HashTracksSemanticFields)
{
  const auto a = parse(kFull);
  auto b = a;
  b.run.output_dir = "elsewhere";
  b.run.workers = 4;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.algorithm.eta[0] = 0.002;
  EXPECT_NE(config_hash(a), config_hash(b));
  auto c = a;
  c.run.seeds.push_back(4);
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
}
