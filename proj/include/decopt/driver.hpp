// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_DRIVER_HPP
#define DECOPT_DRIVER_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "decopt/error.hpp"
#include "decopt/estimators.hpp"
#include "decopt/gossip.hpp"
#include "decopt/metrics.hpp"
#include "decopt/planner.hpp"
#include "decopt/problem.hpp"
#include "decopt/random.hpp"
#include "decopt/topology.hpp"
#include "decopt/update.hpp"

namespace decopt
{

enum class Method
{
  ClientSampled,      // one sampled client per step, Chebyshev-accelerated mixing
  FullParticipation,  // every client every step, one plain gossip round
};

enum class OutputSelector
{
  Shared,     // one epoch index for all clients
  PerClient,  // independent epoch index per client
};

struct Counters
{
  std::size_t steps = 0;
  std::size_t samples = 0;  // oracle queries (two-point queries for zeroth order)
  std::size_t evaluations = 0;
  std::size_t computation_rounds = 0;
  std::size_t communication_rounds = 0;

  bool operator==(const Counters &) const = default;
};

// Per-client iterates, one row per client.
struct ClientStates
{
  StackedVectors x;           // pre-mixing iterate
  StackedVectors y;           // mixed iterate
  StackedVectors w;           // query point
  StackedVectors delta;       // update before mixing
  StackedVectors delta_half;  // mixed update
  StackedVectors w_epoch_sum;
  std::vector<double> s;
};

// Everything an observer may inspect after a step. `active` is the sampled client, or
// npos for full participation.
struct StepView
{
  std::size_t k = 0, t = 0;
  std::size_t active = 0;
  const ClientStates *states = nullptr;
  const Counters *counters = nullptr;
  const RunPlan *plan = nullptr;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

struct RunOptions
{
  // Emit a trace row every `cadence` steps (0: only at the end of each epoch).
  std::size_t cadence = 0;
  // Attach a Goldstein estimate to every `goldstein_every`-th row (0: never).
  std::size_t goldstein_every = 0;
  GoldsteinProbeConfig probe{};
  OutputSelector selector = OutputSelector::Shared;
  // Throw on a broken per-step invariant (clip bound, mean relation, and the eps'
  // consensus bounds when R is planner-chosen).
  bool check_invariants = true;
  std::function<void(const StepView &)> observer;
};

struct EpochOutputs
{
  std::vector<StackedVectors> epoch_sums;   // sum_t w_i^{k,t}, one n x d block per epoch
  std::vector<StackedVectors> epoch_means;  // epoch_sums / T
  StackedVectors w_out;
  std::vector<std::size_t> selected_epoch;  // 0-based epoch index per client
  OutputSelector selector = OutputSelector::Shared;
  StackedVectors y_final;
  Counters counters;
};

namespace detail
{

inline void check_plan_against(const RunPlan &plan, const Problem &problem,
                               const MixingMatrix &matrix)
{
  validate(plan);
  if (plan.n != problem.clients() || plan.n != matrix.size())
  {
    throw ConfigError("run: plan has n = " + std::to_string(plan.n) + ", problem has " +
                      std::to_string(problem.clients()) + " clients, mixing matrix has " +
                      std::to_string(matrix.size()));
  }
  if (plan.d != problem.dim())
  {
    throw ConfigError("run: plan has d = " + std::to_string(plan.d) + ", problem has " +
                      std::to_string(problem.dim()));
  }
}

inline void check_finite(const StackedVectors &z, const char *name, std::size_t k,
                         std::size_t t)
{
  for (Eigen::Index i = 0; i < z.rows(); ++i)
  {
    if (!z.row(i).allFinite())
    {
      throw RuntimeFailure(std::string("non-finite ") + name + " at k = " + std::to_string(k) +
                           ", t = " + std::to_string(t) + ", client = " + std::to_string(i));
    }
  }
}

// s_i ~ Unif[0, 1] for every client, drawn in client order from one stream per step,
// then w_i = y_i + s_i delta_i.
inline void draw_interpolation(const RunPlan &plan, std::size_t k, std::size_t t,
                               ClientStates &st)
{
  Rng rng = make_stream(plan.seed, Purpose::Interpolation, 0, k, t);
  for (Eigen::Index i = 0; i < st.w.rows(); ++i)
  {
    const double s = uniform01(rng);
    st.s[static_cast<std::size_t>(i)] = s;
    st.w.row(i) = st.y.row(i) + s * st.delta_half.row(i);
  }
}

inline void fail_invariant(const std::string &what, std::size_t k, std::size_t t)
{
  throw RuntimeFailure("invariant violated at k = " + std::to_string(k) +
                       ", t = " + std::to_string(t) + ": " + what);
}

// Shared loop skeleton; `step` performs one iteration and updates the counters.
template <typename Step>
EpochOutputs run_loop(const RunPlan &plan, const Problem &problem, const RunOptions &opt,
                      MetricsSink *sink, Step &&step)
{
  const auto n = static_cast<Eigen::Index>(plan.n);
  const auto d = static_cast<Eigen::Index>(plan.d);
  ClientStates st;
  st.x = StackedVectors::Zero(n, d);
  st.y = StackedVectors::Zero(n, d);
  st.w = StackedVectors::Zero(n, d);
  st.delta = StackedVectors::Zero(n, d);
  st.delta_half = StackedVectors::Zero(n, d);
  st.s.assign(plan.n, 0.0);

  EpochOutputs out;
  out.selector = opt.selector;
  out.epoch_sums.reserve(plan.K);
  out.epoch_means.reserve(plan.K);
  Counters c;
  std::size_t rows = 0;

  for (std::size_t k = 1; k <= plan.K; ++k)
  {
    st.delta_half.setZero();
    st.w_epoch_sum = StackedVectors::Zero(n, d);
    for (std::size_t t = 1; t <= plan.T; ++t)
    {
      const std::size_t active = step(k, t, st, c);
      st.w_epoch_sum += st.w;
      ++c.steps;

      if (opt.observer)
      {
        StepView view{k, t, active, &st, &c, &plan};
        opt.observer(view);
      }

      const bool emit = opt.cadence > 0 ? (c.steps % opt.cadence == 0) : (t == plan.T);
      if (sink != nullptr && emit)
      {
        MetricsRecord r;
        r.k = k;
        r.t = t;
        r.samples_total = c.samples;
        r.computation_rounds = c.computation_rounds;
        r.communication_rounds = c.communication_rounds;
        r.evaluations = c.evaluations;
        r.objective = probe_objective(problem, st.w, opt.probe.policy);
        const ConsensusErrors ce = consensus_errors(st.x, st.delta_half);
        r.consensus_x = ce.x;
        r.consensus_delta = ce.delta;
        ++rows;
        if (opt.goldstein_every > 0 && rows % opt.goldstein_every == 0)
        {
          r.goldstein_estimate = probe_goldstein(problem, st.w, opt.probe, plan.seed, c.steps);
        }
        sink->record(r);
      }
    }
    out.epoch_sums.push_back(st.w_epoch_sum);
    out.epoch_means.push_back(st.w_epoch_sum / static_cast<double>(plan.T));
  }

  out.selected_epoch.assign(plan.n, 0);
  if (opt.selector == OutputSelector::Shared)
  {
    Rng rng = make_stream(plan.seed, Purpose::OutputSelect);
    const std::size_t e = uniform_index(rng, plan.K);
    out.selected_epoch.assign(plan.n, e);
  }
  else
  {
    for (std::size_t i = 0; i < plan.n; ++i)
    {
      Rng rng = make_stream(plan.seed, Purpose::OutputSelect, i + 1);
      out.selected_epoch[i] = uniform_index(rng, plan.K);
    }
  }
  out.w_out.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    out.w_out.row(i) = out.epoch_means[out.selected_epoch[static_cast<std::size_t>(i)]].row(i);
  }
  out.y_final = st.y;
  out.counters = c;
  if (sink != nullptr)
  {
    sink->flush();
  }
  return out;
}

}  // namespace detail

//
// Client-sampled decentralized online-to-nonconvex conversion. Per step t of epoch k:
//   i_t ~ Unif{1..n};  x_i = y_i + n delta_i (i = i_t) or y_i;  w_i = y_i + s_i delta_i
//   y = FastGossip(x);  g = estimator at w_{i_t} with radius delta'
//   delta_{i_t} = n clip_D(delta_{i_t} - eta g), others 0;  delta = FastGossip(delta)
// delta is reset to 0 and y carried over at each epoch start; outputs are the per-epoch
// averages of w and one of them per client, picked uniformly.
//
inline EpochOutputs run_docs(const RunPlan &plan, const Problem &problem,
                             const MixingMatrix &matrix, MetricsSink *sink,
                             const RunOptions &opt = {})
{
  detail::check_plan_against(plan, problem, matrix);
  const GossipConfig gossip(matrix, plan.R);
  const double nn = static_cast<double>(plan.n);
  const double y_bound =
      (plan.D + plan.eps_prime) * plan.eps_prime / (plan.D - plan.eps_prime);
  constexpr double rel = 1e-9;

  auto step = [&](std::size_t k, std::size_t t, ClientStates &st, Counters &c) {
    Rng pick = make_stream(plan.seed, Purpose::ClientSelect, 0, k, t);
    const std::size_t active = uniform_index(pick, plan.n);
    const auto a = static_cast<Eigen::Index>(active);

    st.x = st.y;
    st.x.row(a) += nn * st.delta_half.row(a);
    detail::draw_interpolation(plan, k, t, st);
    st.y = fast_gossip(gossip, st.x);

    Rng orng = make_stream(plan.seed, Purpose::Oracle, active, k, t);
    const Vector wa = st.w.row(a).transpose();
    const OracleSample g = estimate(plan.oracle, problem, active, wa, plan.delta_prime, orng);

    st.delta.setZero();
    const Vector dh = st.delta_half.row(a).transpose();
    st.delta.row(a) = inner_update(dh, g.g, plan.eta, plan.D, nn).transpose();
    st.delta_half = fast_gossip(gossip, st.delta);

    c.samples += g.queries;
    c.evaluations += g.evaluations;
    c.computation_rounds += 1;
    c.communication_rounds += 2 * plan.R;

    detail::check_finite(st.y, "y", k, t);
    detail::check_finite(st.w, "w", k, t);
    detail::check_finite(st.delta_half, "delta", k, t);

    if (opt.check_invariants)
    {
      const double dn = st.delta.row(a).norm();
      if (dn > nn * plan.D * (1.0 + rel))
      {
        detail::fail_invariant("|delta_active| = " + std::to_string(dn) + " exceeds n D", k, t);
      }
      const Eigen::RowVectorXd mean = st.delta_half.colwise().mean();
      const Eigen::RowVectorXd expect = st.delta.row(a) / nn;
      if ((mean - expect).norm() > 1e-10 * std::max(1.0, expect.norm()))
      {
        detail::fail_invariant("mixing changed the mean of delta", k, t);
      }
      if (plan.rounds_planned)
      {
        const double dev = max_deviation(st.delta_half);
        if (dev > plan.eps_prime * (1.0 + rel))
        {
          detail::fail_invariant("delta consensus " + std::to_string(dev) + " > eps'", k, t);
        }
        const double ydev = max_deviation(st.y);
        if (ydev > y_bound * (1.0 + rel))
        {
          detail::fail_invariant("y consensus " + std::to_string(ydev) + " > bound", k, t);
        }
      }
    }
    return active;
  };
  return detail::run_loop(plan, problem, opt, sink, step);
}

//
// Full-participation baseline in the style of decentralized online mirror descent:
// every client queries its oracle every step, takes an unscaled clipped step, and both
// x and delta are mixed with a single plain gossip round. plan.R is ignored.
//
inline EpochOutputs run_baseline_full_participation(const RunPlan &plan, const Problem &problem,
                                                    const MixingMatrix &matrix,
                                                    MetricsSink *sink, const RunOptions &opt = {})
{
  detail::check_plan_against(plan, problem, matrix);
  const auto n = static_cast<Eigen::Index>(plan.n);

  auto step = [&](std::size_t k, std::size_t t, ClientStates &st, Counters &c) {
    detail::draw_interpolation(plan, k, t, st);
    st.x = st.y + st.delta_half;
    st.y = plain_gossip(matrix, st.x, 1);

    for (Eigen::Index i = 0; i < n; ++i)
    {
      const auto client = static_cast<std::size_t>(i);
      Rng orng = make_stream(plan.seed, Purpose::Oracle, client, k, t);
      const Vector wi = st.w.row(i).transpose();
      const OracleSample g = estimate(plan.oracle, problem, client, wi, plan.delta_prime, orng);
      const Vector dh = st.delta_half.row(i).transpose();
      st.delta.row(i) = inner_update(dh, g.g, plan.eta, plan.D, 1.0).transpose();
      c.samples += g.queries;
      c.evaluations += g.evaluations;
    }
    st.delta_half = plain_gossip(matrix, st.delta, 1);
    c.computation_rounds += 1;
    c.communication_rounds += 2;

    detail::check_finite(st.y, "y", k, t);
    detail::check_finite(st.w, "w", k, t);
    detail::check_finite(st.delta_half, "delta", k, t);

    if (opt.check_invariants)
    {
      for (Eigen::Index i = 0; i < n; ++i)
      {
        if (st.delta.row(i).norm() > plan.D * (1.0 + 1e-9))
        {
          detail::fail_invariant("|delta_i| exceeds D", k, t);
        }
      }
    }
    return StepView::npos;
  };
  return detail::run_loop(plan, problem, opt, sink, step);
}

inline EpochOutputs run_method(Method m, const RunPlan &plan, const Problem &problem,
                               const MixingMatrix &matrix, MetricsSink *sink,
                               const RunOptions &opt = {})
{
  return m == Method::ClientSampled ? run_docs(plan, problem, matrix, sink, opt)
                                    : run_baseline_full_participation(plan, problem, matrix,
                                                                      sink, opt);
}

}  // namespace decopt

#endif  // DECOPT_DRIVER_HPP
