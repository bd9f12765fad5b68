// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_CONFIG_HPP
#define DECOPT_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "decopt/data.hpp"
#include "decopt/driver.hpp"
#include "decopt/error.hpp"
#include "decopt/estimators.hpp"
#include "decopt/metrics.hpp"

namespace decopt
{

//
// Experiment description, read from a sectioned key/value file:
//
//   [problem]    kind, dataset, samples, d, lambda, alpha, data_seed
//   [topology]   kind, n, neighbors_per_side, path
//   [algorithm]  method, oracle, delta, epsilon, delta_prime, eta, D, R, K, T,
//                eps_prime, L, G, sigma, c0, nu, selector
//   [run]        seeds, cadence, goldstein_every, goldstein_samples,
//                final_goldstein_samples, probe, workers, output_dir
//
// `eta` and `D` accept comma-separated lists; the runner sweeps their cross product.
//
struct ProblemSection
{
  std::string kind = "capped_l1_svm";  // capped_l1_svm | synthetic_piecewise
  std::string dataset;                 // LIBSVM file; empty = generated a9a-like data
  // Dataset: keep the first `samples` rows (0 = all). Generated: number of rows.
  // synthetic_piecewise: samples per client.
  std::size_t samples = 8000;
  std::size_t d = 0;  // 0 = infer from the data
  std::optional<double> lambda;  // default 1e-5 / m
  double alpha = 2.0;
  std::uint64_t data_seed = 0;

  bool operator==(const ProblemSection &) const = default;
};

struct TopologySection
{
  std::string kind = "ring";  // ring | complete | file
  std::size_t n = 16;
  std::size_t neighbors_per_side = 1;
  std::string path;

  bool operator==(const TopologySection &) const = default;
};

struct AlgorithmSection
{
  Method method = Method::ClientSampled;
  OracleType oracle = OracleType::First;
  double delta = 0.1;
  double epsilon = 0.1;
  std::optional<double> delta_prime;
  std::vector<double> eta;
  std::vector<double> D;
  std::optional<std::size_t> R, K, T;
  std::optional<double> eps_prime;
  std::optional<double> L, G, sigma;
  double c0 = 1.0;
  double nu = 1.0;
  OutputSelector selector = OutputSelector::Shared;

  bool operator==(const AlgorithmSection &) const = default;
};

struct RunSection
{
  std::vector<std::uint64_t> seeds{0};
  std::size_t cadence = 100;
  std::size_t goldstein_every = 0;
  std::size_t goldstein_samples = 64;
  std::size_t final_goldstein_samples = 4096;
  ProbePolicy probe = ProbePolicy::AllClients;
  std::size_t workers = 1;
  std::string output_dir = "out";

  bool operator==(const RunSection &) const = default;
};

struct ExperimentConfig
{
  ProblemSection problem;
  TopologySection topology;
  AlgorithmSection algorithm;
  RunSection run;

  bool operator==(const ExperimentConfig &) const = default;
};

inline std::string to_string(Method m) { return m == Method::ClientSampled ? "docs" : "baseline"; }

inline std::string to_string(ProbePolicy p)
{
  switch (p)
  {
  case ProbePolicy::MeanOfClients:
    return "mean_of_clients";
  case ProbePolicy::Client0:
    return "client_0";
  case ProbePolicy::AllClients:
    return "all_clients";
  }
  return "all_clients";
}

inline std::string to_string(OutputSelector s)
{
  return s == OutputSelector::Shared ? "shared" : "per_client";
}

namespace detail
{

inline std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
  {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string &v)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ','))
  {
    out.push_back(trim(item));
  }
  return out;
}

inline double parse_real(const std::string &key, const std::string &v)
{
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
  {
    throw ConfigError(key + ": expected a real number, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t parse_uint(const std::string &key, const std::string &v)
{
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
  {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

inline double parse_positive(const std::string &key, const std::string &v)
{
  const double x = parse_real(key, v);
  if (!(x > 0.0))
  {
    throw ConfigError(key + ": must be positive, got " + v);
  }
  return x;
}

inline std::size_t parse_count(const std::string &key, const std::string &v)
{
  const auto x = parse_uint(key, v);
  if (x < 1)
  {
    throw ConfigError(key + ": must be at least 1");
  }
  return static_cast<std::size_t>(x);
}

}  // namespace detail

inline ExperimentConfig parse_config_text(std::istream &in)
{
  using detail::parse_count;
  using detail::parse_positive;
  using detail::parse_real;
  using detail::parse_uint;

  ExperimentConfig c;
  std::string section;
  std::string raw;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;

  while (std::getline(in, raw))
  {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
    if (line.empty())
    {
      continue;
    }
    if (line.front() == '[')
    {
      if (line.back() != ']')
      {
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      }
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "problem" && section != "topology" && section != "algorithm" &&
          section != "run")
      {
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" +
                          section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
    {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty())
    {
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    }
    const std::string name = detail::trim(std::string_view(line).substr(0, eq));
    const std::string v = detail::trim(std::string_view(line).substr(eq + 1));
    const std::string key = section + "." + name;
    if (seen.count(key) != 0)
    {
      throw ConfigError(key + ": duplicate key (first set on line " +
                        std::to_string(seen[key]) + ")");
    }
    seen[key] = lineno;

    if (section == "problem")
    {
      auto &p = c.problem;
      if (name == "kind")
      {
        if (v != "capped_l1_svm" && v != "synthetic_piecewise")
        {
          throw ConfigError(key + ": expected capped_l1_svm or synthetic_piecewise, got '" + v +
                            "'");
        }
        p.kind = v;
      }
      else if (name == "dataset")
        p.dataset = v;
      else if (name == "samples")
        p.samples = static_cast<std::size_t>(parse_uint(key, v));
      else if (name == "d")
        p.d = static_cast<std::size_t>(parse_uint(key, v));
      else if (name == "lambda")
        p.lambda = parse_positive(key, v);
      else if (name == "alpha")
        p.alpha = parse_positive(key, v);
      else if (name == "data_seed")
        p.data_seed = parse_uint(key, v);
      else
        throw ConfigError(key + ": unknown key");
    }
    else if (section == "topology")
    {
      auto &t = c.topology;
      if (name == "kind")
      {
        if (v != "ring" && v != "complete" && v != "file")
        {
          throw ConfigError(key + ": expected ring, complete or file, got '" + v + "'");
        }
        t.kind = v;
      }
      else if (name == "n")
        t.n = parse_count(key, v);
      else if (name == "neighbors_per_side")
        t.neighbors_per_side = parse_count(key, v);
      else if (name == "path")
        t.path = v;
      else
        throw ConfigError(key + ": unknown key");
    }
    else if (section == "algorithm")
    {
      auto &a = c.algorithm;
      if (name == "method")
      {
        if (v == "docs")
          a.method = Method::ClientSampled;
        else if (v == "baseline")
          a.method = Method::FullParticipation;
        else
          throw ConfigError(key + ": expected docs or baseline, got '" + v + "'");
      }
      else if (name == "oracle")
      {
        if (v == "first")
          a.oracle = OracleType::First;
        else if (v == "zeroth")
          a.oracle = OracleType::Zeroth;
        else
          throw ConfigError(key + ": expected first or zeroth, got '" + v + "'");
      }
      else if (name == "delta")
        a.delta = parse_positive(key, v);
      else if (name == "epsilon")
        a.epsilon = parse_positive(key, v);
      else if (name == "delta_prime")
      {
        const double x = parse_real(key, v);
        if (x < 0.0)
        {
          throw ConfigError(key + ": must be nonnegative");
        }
        a.delta_prime = x;
      }
      else if (name == "eta" || name == "D")
      {
        std::vector<double> vals;
        for (const auto &item : detail::split_list(v))
        {
          vals.push_back(parse_positive(key, item));
        }
        (name == "eta" ? a.eta : a.D) = vals;
      }
      else if (name == "R")
        a.R = parse_count(key, v);
      else if (name == "K")
        a.K = parse_count(key, v);
      else if (name == "T")
        a.T = parse_count(key, v);
      else if (name == "eps_prime")
        a.eps_prime = parse_positive(key, v);
      else if (name == "L")
        a.L = parse_positive(key, v);
      else if (name == "G")
        a.G = parse_positive(key, v);
      else if (name == "sigma")
        a.sigma = parse_positive(key, v);
      else if (name == "c0")
        a.c0 = parse_positive(key, v);
      else if (name == "nu")
      {
        a.nu = parse_real(key, v);
        if (a.nu < 0.0)
        {
          throw ConfigError(key + ": must be nonnegative");
        }
      }
      else if (name == "selector")
      {
        if (v == "shared")
          a.selector = OutputSelector::Shared;
        else if (v == "per_client")
          a.selector = OutputSelector::PerClient;
        else
          throw ConfigError(key + ": expected shared or per_client, got '" + v + "'");
      }
      else
        throw ConfigError(key + ": unknown key");
    }
    else
    {
      auto &r = c.run;
      if (name == "seeds")
      {
        r.seeds.clear();
        for (const auto &item : detail::split_list(v))
        {
          r.seeds.push_back(parse_uint(key, item));
        }
      }
      else if (name == "cadence")
        r.cadence = static_cast<std::size_t>(parse_uint(key, v));
      else if (name == "goldstein_every")
        r.goldstein_every = static_cast<std::size_t>(parse_uint(key, v));
      else if (name == "goldstein_samples")
        r.goldstein_samples = parse_count(key, v);
      else if (name == "final_goldstein_samples")
        r.final_goldstein_samples = static_cast<std::size_t>(parse_uint(key, v));
      else if (name == "probe")
      {
        if (v == "mean_of_clients")
          r.probe = ProbePolicy::MeanOfClients;
        else if (v == "client_0")
          r.probe = ProbePolicy::Client0;
        else if (v == "all_clients")
          r.probe = ProbePolicy::AllClients;
        else
          throw ConfigError(key + ": expected mean_of_clients, client_0 or all_clients");
      }
      else if (name == "workers")
        r.workers = parse_count(key, v);
      else if (name == "output_dir")
        r.output_dir = v;
      else
        throw ConfigError(key + ": unknown key");
    }
  }

  // Cross-field constraints.
  if (c.run.seeds.empty())
  {
    throw ConfigError("run.seeds: at least one seed required");
  }
  if (c.algorithm.eps_prime)
  {
    for (double dv : c.algorithm.D)
    {
      if (!(*c.algorithm.eps_prime < dv))
      {
        throw ConfigError("algorithm.eps_prime: must be smaller than D (consensus-round "
                          "precondition 0 < eps' < D), got eps' = " +
                          format_double(*c.algorithm.eps_prime) + ", D = " + format_double(dv));
      }
    }
  }
  if (c.algorithm.oracle == OracleType::Zeroth && c.algorithm.delta_prime &&
      *c.algorithm.delta_prime == 0.0)
  {
    throw ConfigError("algorithm.delta_prime: zeroth-order oracle needs delta_prime > 0");
  }
  if (c.topology.kind == "file" && c.topology.path.empty())
  {
    throw ConfigError("topology.path: required when kind = file");
  }
  if (c.problem.kind == "synthetic_piecewise" && c.problem.d == 0)
  {
    throw ConfigError("problem.d: required for synthetic_piecewise");
  }
  if (c.problem.kind == "synthetic_piecewise" && c.problem.samples == 0)
  {
    throw ConfigError("problem.samples: must be positive for synthetic_piecewise");
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot open config '" + path + "'");
  }
  return parse_config_text(in);
}

// Canonical text form. parse_config_text(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig &c, bool include_output_dir = true)
{
  std::ostringstream o;
  const auto list = [](const auto &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
      if (i > 0)
      {
        s += ", ";
      }
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(v[i])>>)
        s += format_double(v[i]);
      else
        s += std::to_string(v[i]);
    }
    return s;
  };

  const auto &p = c.problem;
  o << "[problem]\n";
  o << "kind = " << p.kind << "\n";
  if (!p.dataset.empty())
    o << "dataset = " << p.dataset << "\n";
  o << "samples = " << p.samples << "\n";
  o << "d = " << p.d << "\n";
  if (p.lambda)
    o << "lambda = " << format_double(*p.lambda) << "\n";
  o << "alpha = " << format_double(p.alpha) << "\n";
  o << "data_seed = " << p.data_seed << "\n";

  const auto &t = c.topology;
  o << "\n[topology]\n";
  o << "kind = " << t.kind << "\n";
  o << "n = " << t.n << "\n";
  o << "neighbors_per_side = " << t.neighbors_per_side << "\n";
  if (!t.path.empty())
    o << "path = " << t.path << "\n";

  const auto &a = c.algorithm;
  o << "\n[algorithm]\n";
  o << "method = " << to_string(a.method) << "\n";
  o << "oracle = " << to_string(a.oracle) << "\n";
  o << "delta = " << format_double(a.delta) << "\n";
  o << "epsilon = " << format_double(a.epsilon) << "\n";
  if (a.delta_prime)
    o << "delta_prime = " << format_double(*a.delta_prime) << "\n";
  if (!a.eta.empty())
    o << "eta = " << list(a.eta) << "\n";
  if (!a.D.empty())
    o << "D = " << list(a.D) << "\n";
  if (a.R)
    o << "R = " << *a.R << "\n";
  if (a.K)
    o << "K = " << *a.K << "\n";
  if (a.T)
    o << "T = " << *a.T << "\n";
  if (a.eps_prime)
    o << "eps_prime = " << format_double(*a.eps_prime) << "\n";
  if (a.L)
    o << "L = " << format_double(*a.L) << "\n";
  if (a.G)
    o << "G = " << format_double(*a.G) << "\n";
  if (a.sigma)
    o << "sigma = " << format_double(*a.sigma) << "\n";
  o << "c0 = " << format_double(a.c0) << "\n";
  o << "nu = " << format_double(a.nu) << "\n";
  o << "selector = " << to_string(a.selector) << "\n";

  const auto &r = c.run;
  o << "\n[run]\n";
  o << "seeds = " << list(r.seeds) << "\n";
  o << "cadence = " << r.cadence << "\n";
  o << "goldstein_every = " << r.goldstein_every << "\n";
  o << "goldstein_samples = " << r.goldstein_samples << "\n";
  o << "final_goldstein_samples = " << r.final_goldstein_samples << "\n";
  o << "probe = " << to_string(r.probe) << "\n";
  o << "workers = " << r.workers << "\n";
  if (include_output_dir)
    o << "output_dir = " << r.output_dir << "\n";
  return o.str();
}

// FNV-1a over the canonical form, ignoring where outputs go and how many workers run.
inline std::string config_hash(const ExperimentConfig &c)
{
  ExperimentConfig k = c;
  k.run.workers = 1;
  const std::string text = serialize_config(k, false);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text)
  {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream o;
  o << std::hex;
  o.width(16);
  o.fill('0');
  o << h;
  return o.str();
}

}  // namespace decopt

#endif  // DECOPT_CONFIG_HPP
