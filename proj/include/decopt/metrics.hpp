// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_METRICS_HPP
#define DECOPT_METRICS_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "decopt/data.hpp"
#include "decopt/error.hpp"
#include "decopt/problem.hpp"
#include "decopt/random.hpp"
#include "decopt/types.hpp"

namespace decopt
{

inline constexpr const char *kTraceHeader =
    "k,t,samples_total,computation_rounds,communication_rounds,objective,consensus_x,"
    "consensus_delta,goldstein_estimate";

// One trace row.
struct MetricsRecord
{
  std::size_t k = 0, t = 0;
  std::size_t samples_total = 0;
  std::size_t computation_rounds = 0;
  std::size_t communication_rounds = 0;
  std::size_t evaluations = 0;  // raw function/gradient evaluations; not part of the CSV
  double objective = 0.0;
  double consensus_x = 0.0;
  double consensus_delta = 0.0;
  std::optional<double> goldstein_estimate;

  bool operator==(const MetricsRecord &) const = default;
};

inline void write_csv_row(std::ostream &out, const MetricsRecord &r)
{
  out << r.k << ',' << r.t << ',' << r.samples_total << ',' << r.computation_rounds << ','
      << r.communication_rounds << ',' << format_double(r.objective) << ','
      << format_double(r.consensus_x) << ',' << format_double(r.consensus_delta) << ',';
  if (r.goldstein_estimate)
  {
    out << format_double(*r.goldstein_estimate);
  }
  out << '\n';
}

//
// Single-writer trace collector. Keeps rows in memory, streams them to CSV, or both.
// In streaming-only mode memory use is constant in the number of rows.
//
class MetricsSink
{
public:
  MetricsSink() = default;

  // Streams to `path`; the header is written immediately.
  explicit MetricsSink(const std::string &path, bool keep_in_memory = false)
    : file_(std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc)),
      keep_(keep_in_memory)
  {
    if (!*file_)
    {
      throw RuntimeFailure("metrics: cannot open '" + path + "' for writing");
    }
    out_ = file_.get();
    *out_ << kTraceHeader << '\n';
    check_stream();
  }

  // Streams to a caller-owned stream.
  explicit MetricsSink(std::ostream &out, bool keep_in_memory = false)
    : out_(&out), keep_(keep_in_memory)
  {
    *out_ << kTraceHeader << '\n';
    check_stream();
  }

  MetricsSink(const MetricsSink &) = delete;
  MetricsSink &operator=(const MetricsSink &) = delete;

  ~MetricsSink()
  {
    if (out_ != nullptr)
    {
      out_->flush();
    }
  }

  void record(const MetricsRecord &r)
  {
    // Counters never regress within a trace.
    assert(!last_ || (r.samples_total >= last_->samples_total &&
                      r.computation_rounds >= last_->computation_rounds &&
                      r.communication_rounds >= last_->communication_rounds));
    if (!std::isfinite(r.objective) || !std::isfinite(r.consensus_x) ||
        !std::isfinite(r.consensus_delta) ||
        (r.goldstein_estimate && !std::isfinite(*r.goldstein_estimate)))
    {
      throw RuntimeFailure("metrics: non-finite value at k = " + std::to_string(r.k) +
                           ", t = " + std::to_string(r.t));
    }
    last_ = r;
    ++count_;
    if (keep_)
    {
      trace_.push_back(r);
    }
    if (out_ != nullptr)
    {
      write_csv_row(*out_, r);
      check_stream();
    }
  }

  void flush()
  {
    if (out_ != nullptr)
    {
      out_->flush();
      check_stream();
    }
  }

  const std::vector<MetricsRecord> &trace() const { return trace_; }
  const std::optional<MetricsRecord> &last() const { return last_; }
  std::size_t count() const { return count_; }

private:
  void check_stream() const
  {
    if (!*out_)
    {
      throw RuntimeFailure("metrics: write failed");
    }
  }

  std::unique_ptr<std::ofstream> file_;
  std::ostream *out_ = nullptr;
  bool keep_ = true;
  std::vector<MetricsRecord> trace_;
  std::optional<MetricsRecord> last_;
  std::size_t count_ = 0;
};

inline void record(MetricsSink &sink, const MetricsRecord &r) { sink.record(r); }

struct ConsensusErrors
{
  double x = 0.0;      // (1/n) sum_i |x_i - mean x|
  double delta = 0.0;  // max_i |delta_i - mean delta|
};

inline ConsensusErrors consensus_errors(const StackedVectors &x, const StackedVectors &delta)
{
  ConsensusErrors out;
  const Eigen::RowVectorXd xbar = x.colwise().mean();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
  {
    out.x += (x.row(i) - xbar).norm();
  }
  out.x /= static_cast<double>(x.rows());
  const Eigen::RowVectorXd dbar = delta.colwise().mean();
  for (Eigen::Index i = 0; i < delta.rows(); ++i)
  {
    out.delta = std::max(out.delta, (delta.row(i) - dbar).norm());
  }
  return out;
}

inline double max_deviation(const StackedVectors &z)
{
  const Eigen::RowVectorXd mean = z.colwise().mean();
  double m = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
  {
    m = std::max(m, (z.row(i) - mean).norm());
  }
  return m;
}

enum class ProbePolicy
{
  MeanOfClients,
  Client0,
  AllClients,
};

struct GoldsteinProbeConfig
{
  double radius = 0.1;
  std::size_t samples = 64;
  ProbePolicy policy = ProbePolicy::AllClients;
};

//
// Smoothed-gradient surrogate for the Goldstein norm:
//   | (1/M) sum_m grad f(x + (radius/2) u_m) |,  u_m uniform in the unit ball,
// with grad f the deterministic full-data subgradient. As M grows the average tends to
// grad f_{radius/2}(x), which lies in the radius-Goldstein subdifferential, so the
// value upper-bounds the min-norm element in the limit.
//
inline double goldstein_norm_estimate(const Problem &p, const Vector &x,
                                      const GoldsteinProbeConfig &cfg, Rng &rng)
{
  if (cfg.samples < 1 || !(cfg.radius > 0.0))
  {
    throw ConfigError("goldstein probe: need samples >= 1 and radius > 0");
  }
  const auto d = static_cast<Eigen::Index>(p.dim());
  Vector acc = Vector::Zero(d);
  for (std::size_t m = 0; m < cfg.samples; ++m)
  {
    const Vector u = uniform_ball(rng, d);
    acc += p.full_subgradient(x + (0.5 * cfg.radius) * u);
  }
  return (acc / static_cast<double>(cfg.samples)).norm();
}

// Points a probe looks at, per policy.
inline std::vector<Vector> probe_points(const StackedVectors &z, ProbePolicy policy)
{
  std::vector<Vector> pts;
  switch (policy)
  {
  case ProbePolicy::MeanOfClients:
    pts.emplace_back(z.colwise().mean().transpose());
    break;
  case ProbePolicy::Client0:
    pts.emplace_back(z.row(0).transpose());
    break;
  case ProbePolicy::AllClients:
    for (Eigen::Index i = 0; i < z.rows(); ++i)
    {
      pts.emplace_back(z.row(i).transpose());
    }
    break;
  }
  return pts;
}

// Objective averaged over the probe points.
inline double probe_objective(const Problem &p, const StackedVectors &z, ProbePolicy policy)
{
  const auto pts = probe_points(z, policy);
  double s = 0.0;
  for (const auto &x : pts)
  {
    s += p.objective(x);
  }
  return s / static_cast<double>(pts.size());
}

// Goldstein estimate averaged over the probe points; point j uses stream (seed, Probe, j, tag).
inline double probe_goldstein(const Problem &p, const StackedVectors &z,
                              const GoldsteinProbeConfig &cfg, std::uint64_t seed,
                              std::uint64_t tag)
{
  const auto pts = probe_points(z, cfg.policy);
  double s = 0.0;
  for (std::size_t j = 0; j < pts.size(); ++j)
  {
    Rng rng = make_stream(seed, Purpose::Probe, j, tag);
    s += goldstein_norm_estimate(p, pts[j], cfg, rng);
  }
  return s / static_cast<double>(pts.size());
}

}  // namespace decopt

#endif  // DECOPT_METRICS_HPP
