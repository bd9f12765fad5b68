// SPDX-License-Identifier: Apache-2.0

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "decopt/data.hpp"

using namespace decopt;

TEST(Data, ParsesLine)
{
  const auto s = parse_libsvm_line("+1 3:1 11:0.5 14:-2e-3", 123, 1);
  EXPECT_EQ(s.label, 1);
  EXPECT_EQ(s.indices, (std::vector<std::uint32_t>{2, 10, 13}));
  EXPECT_EQ(s.values, (std::vector<double>{1.0, 0.5, -2e-3}));
}

TEST(Data, LabelsAccepted)
{
  EXPECT_EQ(parse_libsvm_line("-1 1:1", 0, 1).label, -1);
  EXPECT_EQ(parse_libsvm_line("0 1:1", 0, 1).label, -1);
  EXPECT_EQ(parse_libsvm_line("1", 0, 1).label, 1);
  EXPECT_EQ(parse_libsvm_line("  +1\t2:1 ", 0, 1).label, 1);
}

TEST(Data, ErrorsCarryLineAndColumn)
{
  try
  {
    (void)parse_libsvm_line("+1 3:1 2:1", 0, 7);
    FAIL();
  }
  catch (const ParseError &e)
  {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_EQ(e.column(), 8u);
  }
}

TEST(Data, RejectsMalformedTokens)
{
  for (const char *bad : {"", "2 1:1", "x 1:1", "+1 0:1", "+1 1:", "+1 :1", "+1 1-1",
                          "+1 1:abc", "+1 1:nan", "+1 2:1 2:1", "+1 124:1"})
  {
    EXPECT_THROW((void)parse_libsvm_line(bad, 123, 1), ParseError) << "'" << bad << "'";
  }
}

TEST(Data, StreamSkipsBlankLinesAndKeepsLineNumbers)
{
  std::istringstream in("+1 1:1\n\n-1 2:1\n+1 3:x\n");
  try
  {
    (void)parse_libsvm(in, 0);
    FAIL();
  }
  catch (const ParseError &e)
  {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Data, RoundTrip)
{
  const auto data = make_a9a_like(500, 11);
  std::ostringstream out;
  serialize_libsvm(out, data);
  std::istringstream in(out.str());
  const auto again = parse_libsvm(in, kA9aDimension);
  EXPECT_EQ(again, data);
  std::ostringstream out2;
  serialize_libsvm(out2, again);
  EXPECT_EQ(out2.str(), out.str());
}

TEST(Data, RoundTripExactDoubles)
{
  DataSample s;
  s.label = -1;
  s.indices = {0, 4};
  s.values = {0.1, 1.0 / 3.0};
  std::ostringstream out;
  serialize_libsvm(out, s);
  EXPECT_EQ(parse_libsvm_line(out.str(), 0, 1), s);
}

TEST(Data, InferDimension)
{
  std::istringstream in("+1 1:1 40:1\n-1 7:1\n");
  EXPECT_EQ(infer_dimension(parse_libsvm(in, 0)), 40u);
}

TEST(Data, ShardIsPartitionAndSeeded)
{
  const auto a = shard(103, 16, 5);
  const auto b = shard(103, 16, 5);
  const auto c = shard(103, 16, 6);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  std::set<std::size_t> seen;
  for (const auto &s : a)
  {
    EXPECT_GE(s.size(), 6u);
    EXPECT_LE(s.size(), 7u);
    seen.insert(s.begin(), s.end());
  }
  EXPECT_EQ(seen.size(), 103u);
  EXPECT_THROW((void)shard(3, 4, 0), ConfigError);
  EXPECT_THROW((void)shard(3, 0, 0), ConfigError);
}

TEST(Data, A9aLikeShape)
{
  const auto data = make_a9a_like(4000, 3);
  std::size_t pos = 0;
  for (const auto &s : data)
  {
    EXPECT_EQ(s.indices.size(), 14u);
    EXPECT_LT(s.indices.back(), kA9aDimension);
    for (double v : s.values)
      EXPECT_EQ(v, 1.0);
    pos += s.label == 1;
  }
  const double frac = static_cast<double>(pos) / 4000.0;
  EXPECT_GT(frac, 0.2);
  EXPECT_LT(frac, 0.3);
  EXPECT_EQ(make_a9a_like(50, 3), make_a9a_like(50, 3));
}
