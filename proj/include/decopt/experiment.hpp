// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_EXPERIMENT_HPP
#define DECOPT_EXPERIMENT_HPP

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decopt/config.hpp"
#include "decopt/data.hpp"
#include "decopt/driver.hpp"
#include "decopt/metrics.hpp"
#include "decopt/planner.hpp"
#include "decopt/problem.hpp"
#include "decopt/topology.hpp"

namespace decopt
{

inline constexpr const char *kVersion = "0.1.0";
inline constexpr const char *kOutputDirEnv = "DECOPT_OUTPUT_DIR";

inline MixingMatrix build_topology(const TopologySection &t)
{
  if (t.kind == "ring")
    return build_ring(t.n, t.neighbors_per_side);
  if (t.kind == "complete")
    return build_complete(t.n);
  return load_weights_file(t.path);
}

// Rows shared by every seed; sharding happens per seed.
inline std::shared_ptr<const std::vector<DataSample>> load_problem_data(const ProblemSection &p)
{
  std::vector<DataSample> rows;
  if (p.dataset.empty())
  {
    rows = make_a9a_like(p.samples, p.data_seed);
  }
  else
  {
    rows = load_libsvm(p.dataset, p.d);
    if (p.samples > 0 && rows.size() > p.samples)
    {
      rows.resize(p.samples);
    }
  }
  return std::make_shared<const std::vector<DataSample>>(std::move(rows));
}

inline std::shared_ptr<const Problem>
build_problem(const ProblemSection &p, std::size_t clients, std::uint64_t seed,
              const std::shared_ptr<const std::vector<DataSample>> &data)
{
  if (p.kind == "synthetic_piecewise")
  {
    return PiecewiseProblem::random(clients, p.d, p.samples, p.data_seed);
  }
  std::size_t d = p.d;
  if (d == 0)
  {
    d = p.dataset.empty() ? kA9aDimension : infer_dimension(*data);
  }
  const double lambda =
      p.lambda ? *p.lambda : 1e-5 / static_cast<double>(std::max<std::size_t>(data->size(), 1));
  if (data->size() < clients)
  {
    throw ConfigError("problem.samples: " + std::to_string(data->size()) +
                      " rows cannot be split over " + std::to_string(clients) + " clients");
  }
  return std::make_shared<CappedL1Svm>(data, shard(data->size(), clients, seed), d, lambda,
                                       p.alpha);
}

// Grid cells: cross product of the eta and D lists (an empty list means "planner").
struct GridCell
{
  std::optional<double> eta, D;
  bool operator==(const GridCell &) const = default;
};

inline std::vector<GridCell> expand_grid(const AlgorithmSection &a)
{
  std::vector<std::optional<double>> etas, Ds;
  for (double v : a.eta)
    etas.emplace_back(v);
  for (double v : a.D)
    Ds.emplace_back(v);
  if (etas.empty())
    etas.emplace_back();
  if (Ds.empty())
    Ds.emplace_back();
  std::vector<GridCell> cells;
  for (const auto &e : etas)
  {
    for (const auto &dv : Ds)
    {
      cells.push_back({e, dv});
    }
  }
  return cells;
}

inline RunPlan resolve_plan(const ExperimentConfig &c, const GridCell &cell, std::uint64_t seed,
                            double gamma, const Problem &problem)
{
  const auto &a = c.algorithm;
  PlannerInputs in;
  in.delta = a.delta;
  in.epsilon = a.epsilon;
  in.n = problem.clients();
  in.d = problem.dim();
  in.gamma = gamma;
  in.L = a.L.value_or(problem.lipschitz());
  in.G = a.G.value_or(problem.grad_bound());
  in.oracle = a.oracle;
  in.delta_prime = a.delta_prime;
  in.sigma = a.sigma;
  in.c0 = a.c0;
  in.nu = a.nu;
  in.seed = seed;
  PlanOverrides ov;
  ov.eta = cell.eta;
  ov.D = cell.D;
  ov.eps_prime = a.eps_prime;
  ov.R = a.R;
  ov.K = a.K;
  ov.T = a.T;
  return plan_parameters(in, ov);
}

struct SeedResult
{
  std::uint64_t seed = 0;
  std::size_t cell = 0;
  GridCell grid;
  bool ok = false;
  std::string error;
  std::string trace_path;
  double final_objective = 0.0;
  double final_goldstein = 0.0;
  Counters counters;
  RunPlan plan;
};

struct Aggregate
{
  double mean = 0.0, min = 0.0, max = 0.0;
  std::size_t count = 0;
};

inline Aggregate aggregate(const std::vector<double> &v)
{
  Aggregate a;
  a.count = v.size();
  if (v.empty())
  {
    return a;
  }
  a.min = *std::min_element(v.begin(), v.end());
  a.max = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v)
    s += x;
  a.mean = s / static_cast<double>(v.size());
  return a;
}

struct CellSummary
{
  GridCell grid;
  Aggregate goldstein, objective;
};

struct RunSummary
{
  std::vector<SeedResult> runs;
  std::vector<CellSummary> cells;
  std::string config_hash;
  std::string version = kVersion;
  std::string output_dir;
  double gamma = 0.0;

  std::size_t failures() const
  {
    return static_cast<std::size_t>(
        std::count_if(runs.begin(), runs.end(), [](const SeedResult &r) { return !r.ok; }));
  }
};

inline nlohmann::json plan_json(const RunPlan &p)
{
  return {{"delta", p.delta},   {"epsilon", p.epsilon}, {"delta_prime", p.delta_prime},
          {"K", p.K},           {"T", p.T},             {"R", p.R},
          {"eta", p.eta},       {"D", p.D},             {"eps_prime", p.eps_prime},
          {"oracle", to_string(p.oracle)},              {"n", p.n},
          {"d", p.d},           {"seed", p.seed},       {"rounds_planned", p.rounds_planned}};
}

inline nlohmann::json summary_json(const RunSummary &s)
{
  nlohmann::json j;
  j["version"] = s.version;
  j["config_hash"] = s.config_hash;
  j["gamma"] = s.gamma;
  j["runs"] = nlohmann::json::array();
  for (const auto &r : s.runs)
  {
    nlohmann::json e{{"seed", r.seed}, {"cell", r.cell}, {"status", r.ok ? "ok" : "failed"}};
    if (r.grid.eta)
      e["eta"] = *r.grid.eta;
    if (r.grid.D)
      e["D"] = *r.grid.D;
    if (r.ok)
    {
      e["trace"] = r.trace_path;
      e["final_objective"] = r.final_objective;
      e["final_goldstein_estimate"] = r.final_goldstein;
      e["counters"] = {{"steps", r.counters.steps},
                       {"samples_total", r.counters.samples},
                       {"evaluations", r.counters.evaluations},
                       {"computation_rounds", r.counters.computation_rounds},
                       {"communication_rounds", r.counters.communication_rounds}};
      e["plan"] = plan_json(r.plan);
    }
    else
    {
      e["error"] = r.error;
    }
    j["runs"].push_back(e);
  }
  j["aggregate"] = nlohmann::json::array();
  for (std::size_t c = 0; c < s.cells.size(); ++c)
  {
    const auto &cs = s.cells[c];
    const auto agg = [](const Aggregate &a) {
      return nlohmann::json{{"mean", a.mean}, {"min", a.min}, {"max", a.max}, {"count", a.count}};
    };
    nlohmann::json e{{"cell", c},
                     {"final_goldstein_estimate", agg(cs.goldstein)},
                     {"final_objective", agg(cs.objective)}};
    if (cs.grid.eta)
      e["eta"] = *cs.grid.eta;
    if (cs.grid.D)
      e["D"] = *cs.grid.D;
    j["aggregate"].push_back(e);
  }
  return j;
}

// Output directory: the environment override wins over run.output_dir.
inline std::string resolve_output_dir(const ExperimentConfig &c)
{
  if (const char *env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0')
  {
    return env;
  }
  return c.run.output_dir;
}

inline SeedResult run_single(const ExperimentConfig &c, const MixingMatrix &matrix,
                             const std::shared_ptr<const std::vector<DataSample>> &data,
                             const GridCell &cell, std::size_t cell_index, std::uint64_t seed,
                             const std::filesystem::path &trace_path)
{
  SeedResult r;
  r.seed = seed;
  r.cell = cell_index;
  r.grid = cell;
  r.trace_path = trace_path.string();
  const auto problem = build_problem(c.problem, matrix.size(), seed, data);
  r.plan = resolve_plan(c, cell, seed, matrix.gamma(), *problem);

  RunOptions opt;
  opt.cadence = c.run.cadence;
  opt.goldstein_every = c.run.goldstein_every;
  opt.probe.radius = c.algorithm.delta;
  opt.probe.samples = c.run.goldstein_samples;
  opt.probe.policy = c.run.probe;
  opt.selector = c.algorithm.selector;

  MetricsSink sink(r.trace_path);
  const EpochOutputs out = run_method(c.algorithm.method, r.plan, *problem, matrix, &sink, opt);
  r.counters = out.counters;
  r.final_objective = probe_objective(*problem, out.w_out, c.run.probe);
  if (c.run.final_goldstein_samples > 0)
  {
    GoldsteinProbeConfig fin = opt.probe;
    fin.samples = c.run.final_goldstein_samples;
    r.final_goldstein = probe_goldstein(*problem, out.w_out, fin, seed, ~std::uint64_t{0});
  }
  r.ok = true;
  return r;
}

//
// Runs every (grid cell, seed) pair. Component errors abort only that run; they are
// logged to `log` and reported in the summary. Configuration errors that affect every
// run (topology, data) propagate as ConfigError.
//
inline RunSummary run_experiment(const ExperimentConfig &c, std::ostream &log = std::cerr)
{
  RunSummary s;
  s.config_hash = config_hash(c);
  s.output_dir = resolve_output_dir(c);

  const MixingMatrix matrix = build_topology(c.topology);
  s.gamma = matrix.gamma();
  const auto data = c.problem.kind == "capped_l1_svm"
                        ? load_problem_data(c.problem)
                        : std::make_shared<const std::vector<DataSample>>();

  const auto cells = expand_grid(c.algorithm);
  const std::filesystem::path root(s.output_dir);
  std::filesystem::create_directories(root);

  struct Job
  {
    std::size_t cell;
    std::uint64_t seed;
    std::filesystem::path trace;
  };
  std::vector<Job> jobs;
  for (std::size_t ci = 0; ci < cells.size(); ++ci)
  {
    const auto dir = cells.size() > 1 ? root / ("cell_" + std::to_string(ci)) : root;
    std::filesystem::create_directories(dir);
    for (auto seed : c.run.seeds)
    {
      jobs.push_back({ci, seed, dir / ("trace_" + std::to_string(seed) + ".csv")});
    }
  }

  std::mutex log_mutex;
  const auto work = [&](const Job &j) {
    try
    {
      return run_single(c, matrix, data, cells[j.cell], j.cell, j.seed, j.trace);
    }
    catch (const std::exception &e)
    {
      SeedResult r;
      r.seed = j.seed;
      r.cell = j.cell;
      r.grid = cells[j.cell];
      r.error = e.what();
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "run failed (cell " << j.cell << ", seed " << j.seed << "): " << e.what() << "\n";
      return r;
    }
  };

  // Jobs are independent and write to their own files; results keep job order.
  s.runs.resize(jobs.size());
  const std::size_t workers = std::max<std::size_t>(1, c.run.workers);
  for (std::size_t start = 0; start < jobs.size(); start += workers)
  {
    const std::size_t stop = std::min(jobs.size(), start + workers);
    if (workers == 1)
    {
      s.runs[start] = work(jobs[start]);
      continue;
    }
    std::vector<std::future<SeedResult>> futs;
    for (std::size_t j = start; j < stop; ++j)
    {
      futs.push_back(std::async(std::launch::async, work, std::cref(jobs[j])));
    }
    for (std::size_t j = start; j < stop; ++j)
    {
      s.runs[j] = futs[j - start].get();
    }
  }

  for (std::size_t ci = 0; ci < cells.size(); ++ci)
  {
    std::vector<double> gs, objs;
    for (const auto &r : s.runs)
    {
      if (r.cell == ci && r.ok)
      {
        gs.push_back(r.final_goldstein);
        objs.push_back(r.final_objective);
      }
    }
    s.cells.push_back({cells[ci], aggregate(gs), aggregate(objs)});
  }

  std::ofstream js(root / "summary.json");
  js << summary_json(s).dump(2) << "\n";
  if (!js)
  {
    throw RuntimeFailure("cannot write summary.json in '" + s.output_dir + "'");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Trace comparison
// ---------------------------------------------------------------------------

enum class XAxis
{
  Samples,
  Computation,
  Communication,
};

inline XAxis parse_x_axis(const std::string &s)
{
  if (s == "samples")
    return XAxis::Samples;
  if (s == "computation")
    return XAxis::Computation;
  if (s == "communication")
    return XAxis::Communication;
  throw ConfigError("--x-axis: expected samples, computation or communication, got '" + s + "'");
}

inline std::vector<MetricsRecord> read_trace(std::istream &in, const std::string &name)
{
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
  {
    throw ConfigError(name + ": schema mismatch, expected header '" + std::string(kTraceHeader) +
                      "'");
  }
  std::vector<MetricsRecord> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty())
    {
      continue;
    }
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
    {
      f.push_back(cell);
    }
    if (!line.empty() && line.back() == ',')
    {
      f.emplace_back();
    }
    if (f.size() != 9)
    {
      throw ConfigError(name + ": line " + std::to_string(lineno) + ": expected 9 fields, got " +
                        std::to_string(f.size()));
    }
    const std::string where = name + ": line " + std::to_string(lineno);
    MetricsRecord r;
    r.k = detail::parse_uint(where, f[0]);
    r.t = detail::parse_uint(where, f[1]);
    r.samples_total = detail::parse_uint(where, f[2]);
    r.computation_rounds = detail::parse_uint(where, f[3]);
    r.communication_rounds = detail::parse_uint(where, f[4]);
    r.objective = detail::parse_real(where, f[5]);
    r.consensus_x = detail::parse_real(where, f[6]);
    r.consensus_delta = detail::parse_real(where, f[7]);
    if (!f[8].empty())
    {
      r.goldstein_estimate = detail::parse_real(where, f[8]);
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<MetricsRecord> read_trace(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("cannot open trace '" + path + "'");
  }
  return read_trace(in, path);
}

inline std::size_t x_value(const MetricsRecord &r, XAxis axis)
{
  switch (axis)
  {
  case XAxis::Samples:
    return r.samples_total;
  case XAxis::Computation:
    return r.computation_rounds;
  case XAxis::Communication:
    return r.communication_rounds;
  }
  return r.samples_total;
}

struct TraceInput
{
  std::string method;
  std::string seed;
  std::string path;
};

// "label=path", or a bare path labelled by its directory; the seed comes from trace_<seed>.csv.
inline TraceInput trace_input_from_arg(const std::string &arg)
{
  TraceInput t;
  std::string path = arg;
  if (const auto eq = arg.find('='); eq != std::string::npos)
  {
    t.method = arg.substr(0, eq);
    path = arg.substr(eq + 1);
  }
  t.path = path;
  const std::filesystem::path p(path);
  if (t.method.empty())
  {
    t.method = p.parent_path().filename().string();
    if (t.method.empty())
    {
      t.method = p.stem().string();
    }
  }
  const std::string stem = p.stem().string();
  if (stem.rfind("trace_", 0) == 0)
  {
    t.seed = stem.substr(6);
  }
  return t;
}

//
// Long-format table `method,seed,x,objective,goldstein_estimate`. Rows from all traces
// are merged and stably ordered by x; no values are interpolated.
//
inline void emit_comparison(const std::vector<TraceInput> &inputs, XAxis axis, std::ostream &out)
{
  struct Row
  {
    std::size_t x;
    std::size_t src;
    MetricsRecord r;
  };
  std::vector<Row> rows;
  for (std::size_t s = 0; s < inputs.size(); ++s)
  {
    for (const auto &r : read_trace(inputs[s].path))
    {
      rows.push_back({x_value(r, axis), s, r});
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row &a, const Row &b) { return a.x < b.x; });
  out << "method,seed,x,objective,goldstein_estimate\n";
  for (const auto &row : rows)
  {
    out << inputs[row.src].method << ',' << inputs[row.src].seed << ',' << row.x << ','
        << format_double(row.r.objective) << ',';
    if (row.r.goldstein_estimate)
    {
      out << format_double(*row.r.goldstein_estimate);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Trace analysis helpers
// ---------------------------------------------------------------------------

// Trailing moving average of the objective over `window` rows (shorter at the start).
inline std::vector<double> windowed_objective(const std::vector<MetricsRecord> &trace,
                                              std::size_t window)
{
  std::vector<double> out(trace.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i)
  {
    acc += trace[i].objective;
    if (i >= window)
    {
      acc -= trace[i - window].objective;
    }
    out[i] = acc / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

// Means of consecutive non-overlapping blocks of `block` rows; a short tail is dropped.
inline std::vector<double> block_means(const std::vector<MetricsRecord> &trace, std::size_t block)
{
  std::vector<double> out;
  for (std::size_t b = 0; b + block <= trace.size(); b += block)
  {
    double s = 0.0;
    for (std::size_t i = b; i < b + block; ++i)
    {
      s += trace[i].objective;
    }
    out.push_back(s / static_cast<double>(block));
  }
  return out;
}

// First row at which the windowed objective drops to `threshold`, or nullopt.
inline std::optional<std::size_t> first_crossing(const std::vector<double> &series,
                                                 double threshold)
{
  for (std::size_t i = 0; i < series.size(); ++i)
  {
    if (series[i] <= threshold)
    {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace decopt

#endif  // DECOPT_EXPERIMENT_HPP
