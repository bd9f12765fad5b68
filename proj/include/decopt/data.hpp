// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_DATA_HPP
#define DECOPT_DATA_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "decopt/error.hpp"
#include "decopt/random.hpp"

namespace decopt
{

// Sparse labelled example. Indices are 0-based and strictly increasing.
struct DataSample
{
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  int label = 1;  // -1 or +1

  bool operator==(const DataSample &) const = default;

  double dot(const Vector &x) const
  {
    double s = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k)
    {
      s += values[k] * x(static_cast<Eigen::Index>(indices[k]));
    }
    return s;
  }

  double norm() const
  {
    double s = 0.0;
    for (double v : values)
    {
      s += v * v;
    }
    return std::sqrt(s);
  }
};

namespace detail
{

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

inline int parse_label(std::string_view tok, std::size_t line, std::size_t col)
{
  std::string_view body = tok;
  if (!body.empty() && body.front() == '+')
  {
    body.remove_prefix(1);
  }
  long long v = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size())
  {
    throw ParseError(line, col, "malformed label '" + std::string(tok) + "'");
  }
  if (tok.front() == '+' && v < 0)
  {
    throw ParseError(line, col, "malformed label '" + std::string(tok) + "'");
  }
  if (v == 1)
  {
    return 1;
  }
  if (v == -1 || v == 0)
  {
    return -1;
  }
  throw ParseError(line, col, "label " + std::string(tok) + " is not in {-1, +1} or {0, 1}");
}

}  // namespace detail

// Parses one LIBSVM line: `label idx:val idx:val ...` with 1-based ascending indices.
// `dim` of 0 means unbounded. Line number is only used for error messages.
inline DataSample parse_libsvm_line(std::string_view text, std::size_t dim, std::size_t line)
{
  DataSample s;
  std::size_t pos = 0;
  const auto skip = [&] {
    while (pos < text.size() && detail::is_space(text[pos]))
    {
      ++pos;
    }
  };
  const auto token = [&] {
    const std::size_t b = pos;
    while (pos < text.size() && !detail::is_space(text[pos]))
    {
      ++pos;
    }
    return text.substr(b, pos - b);
  };

  skip();
  if (pos == text.size())
  {
    throw ParseError(line, 1, "missing label");
  }
  std::size_t col = pos + 1;
  s.label = detail::parse_label(token(), line, col);

  long long last = 0;
  for (skip(); pos < text.size(); skip())
  {
    col = pos + 1;
    const std::string_view tok = token();
    const std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
    {
      throw ParseError(line, col, "expected index:value, got '" + std::string(tok) + "'");
    }
    long long idx = 0;
    auto [iptr, iec] = std::from_chars(tok.data(), tok.data() + colon, idx);
    if (iec != std::errc() || iptr != tok.data() + colon)
    {
      throw ParseError(line, col, "malformed index in '" + std::string(tok) + "'");
    }
    if (idx < 1)
    {
      throw ParseError(line, col, "index must be >= 1, got " + std::to_string(idx));
    }
    if (idx <= last)
    {
      throw ParseError(line, col, "indices must be strictly ascending (" + std::to_string(idx) +
                                      " after " + std::to_string(last) + ")");
    }
    if (dim != 0 && static_cast<std::size_t>(idx) > dim)
    {
      throw ParseError(line, col, "index " + std::to_string(idx) + " exceeds dimension " +
                                      std::to_string(dim));
    }
    const std::string_view vtxt = tok.substr(colon + 1);
    double v = 0.0;
    auto [vptr, vec] = std::from_chars(vtxt.data(), vtxt.data() + vtxt.size(), v);
    if (vec != std::errc() || vptr != vtxt.data() + vtxt.size() || !std::isfinite(v))
    {
      throw ParseError(line, col + colon + 1, "malformed value '" + std::string(vtxt) + "'");
    }
    last = idx;
    s.indices.push_back(static_cast<std::uint32_t>(idx - 1));
    s.values.push_back(v);
  }
  return s;
}

// Blank lines are skipped. With dim == 0 the dimension is unchecked.
inline std::vector<DataSample> parse_libsvm(std::istream &in, std::size_t dim)
{
  std::vector<DataSample> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text))
  {
    ++line;
    if (std::all_of(text.begin(), text.end(), detail::is_space))
    {
      continue;
    }
    out.push_back(parse_libsvm_line(text, dim, line));
  }
  return out;
}

inline std::vector<DataSample> load_libsvm(const std::string &path, std::size_t dim_hint)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("problem.dataset: cannot open '" + path + "'");
  }
  return parse_libsvm(in, dim_hint);
}

// Largest index + 1 over the dataset.
inline std::size_t infer_dimension(const std::vector<DataSample> &data)
{
  std::size_t d = 0;
  for (const auto &s : data)
  {
    if (!s.indices.empty())
    {
      d = std::max<std::size_t>(d, s.indices.back() + 1);
    }
  }
  return d;
}

inline std::string format_double(double v)
{
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

// Shortest round-trip representation, so parse(serialize(s)) == s bit for bit.
inline void serialize_libsvm(std::ostream &out, const DataSample &s)
{
  out << (s.label > 0 ? "+1" : "-1");
  for (std::size_t k = 0; k < s.indices.size(); ++k)
  {
    out << ' ' << (s.indices[k] + 1) << ':' << format_double(s.values[k]);
  }
  out << '\n';
}

inline void serialize_libsvm(std::ostream &out, const std::vector<DataSample> &data)
{
  for (const auto &s : data)
  {
    serialize_libsvm(out, s);
  }
}

// Seeded shuffle, then round-robin assignment: shard sizes differ by at most one.
// Entries are indices into the original dataset.
inline std::vector<std::vector<std::size_t>> shard(std::size_t count, std::size_t clients,
                                                   std::uint64_t seed)
{
  if (clients == 0)
  {
    throw ConfigError("shard: need at least one client");
  }
  if (clients > count)
  {
    throw ConfigError("shard: " + std::to_string(clients) + " clients but only " +
                      std::to_string(count) + " samples");
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_stream(seed, Purpose::Shard);
  for (std::size_t i = count; i > 1; --i)
  {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  std::vector<std::vector<std::size_t>> shards(clients);
  for (std::size_t p = 0; p < count; ++p)
  {
    shards[p % clients].push_back(order[p]);
  }
  return shards;
}

//
// Synthetic stand-in with the layout of the a9a benchmark: 123 binary features in 14
// one-hot groups (one active feature per group, skewed category frequencies) and
// labels from a planted linear rule with ~24% positives and 5% label noise.
//
inline constexpr std::size_t kA9aDimension = 123;

inline std::vector<DataSample> make_a9a_like(std::size_t count, std::uint64_t seed)
{
  static constexpr std::array<std::uint32_t, 14> groups{5, 8, 16, 7, 14, 6, 5,
                                                        2, 5, 3, 3, 5, 42, 2};
  Rng rng = make_stream(seed, Purpose::Data);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vector planted(static_cast<Eigen::Index>(kA9aDimension));
  for (Eigen::Index j = 0; j < planted.size(); ++j)
  {
    planted(j) = gauss(rng);
  }

  std::vector<DataSample> data(count);
  std::vector<double> score(count);
  for (std::size_t r = 0; r < count; ++r)
  {
    std::uint32_t offset = 0;
    for (const std::uint32_t size : groups)
    {
      // Geometric-like preference for low categories.
      std::uint32_t c = 0;
      while (c + 1 < size && uniform01(rng) < 0.55)
      {
        ++c;
      }
      data[r].indices.push_back(offset + c);
      data[r].values.push_back(1.0);
      offset += size;
    }
    score[r] = data[r].dot(planted);
  }

  std::vector<double> sorted = score;
  const auto q = static_cast<std::ptrdiff_t>(0.76 * static_cast<double>(count));
  std::nth_element(sorted.begin(), sorted.begin() + q, sorted.end());
  const double threshold = count > 0 ? sorted[static_cast<std::size_t>(q)] : 0.0;
  for (std::size_t r = 0; r < count; ++r)
  {
    int label = score[r] > threshold ? 1 : -1;
    if (uniform01(rng) < 0.05)
    {
      label = -label;
    }
    data[r].label = label;
  }
  return data;
}

}  // namespace decopt

#endif  // DECOPT_DATA_HPP
