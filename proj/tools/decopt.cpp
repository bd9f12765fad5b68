// SPDX-License-Identifier: Apache-2.0
//
// decopt: run, plan and compare decentralized nonsmooth optimization experiments.
//
//   decopt run <config> [--dry-run]
//   decopt plan <config>
//   decopt compare <traces...> --x-axis=samples|computation|communication [-o out.csv]
//   decopt validate-topology <weights-file>
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.
// DECOPT_OUTPUT_DIR overrides run.output_dir.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "decopt/decopt.hpp"

namespace
{

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeFailure = 2;

int cmd_run(const std::string &path)
{
  const auto cfg = decopt::parse_config(path);
  const auto summary = decopt::run_experiment(cfg, std::cerr);
  const auto failed = summary.failures();
  std::cout << "runs: " << summary.runs.size() << ", failed: " << failed
            << ", output: " << summary.output_dir << "\n";
  for (const auto &r : summary.runs)
  {
    if (r.ok)
    {
      std::cout << "  cell " << r.cell << " seed " << r.seed
                << ": objective = " << decopt::format_double(r.final_objective)
                << ", goldstein = " << decopt::format_double(r.final_goldstein) << "\n";
    }
  }
  if (failed == summary.runs.size())
  {
    return kRuntimeFailure;
  }
  return kOk;
}

int cmd_plan(const std::string &path)
{
  const auto cfg = decopt::parse_config(path);
  const auto matrix = decopt::build_topology(cfg.topology);
  const auto data = cfg.problem.kind == "capped_l1_svm"
                        ? decopt::load_problem_data(cfg.problem)
                        : std::make_shared<const std::vector<decopt::DataSample>>();
  const auto seed = cfg.run.seeds.front();
  const auto problem = decopt::build_problem(cfg.problem, matrix.size(), seed, data);
  std::cout << "config_hash = " << decopt::config_hash(cfg) << "\n";
  std::cout << "gamma = " << decopt::format_double(matrix.gamma()) << "\n";
  std::cout << "L = " << decopt::format_double(problem->lipschitz()) << "\n";
  std::cout << "G = " << decopt::format_double(problem->grad_bound()) << "\n";
  const auto cells = decopt::expand_grid(cfg.algorithm);
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    if (cells.size() > 1)
    {
      std::cout << "\n[cell " << c << "]\n";
    }
    std::cout << decopt::resolve_plan(cfg, cells[c], seed, matrix.gamma(), *problem);
  }
  return kOk;
}

int cmd_compare(const std::vector<std::string> &traces, const std::string &axis,
                const std::string &out_path)
{
  const auto x = decopt::parse_x_axis(axis);
  std::vector<decopt::TraceInput> inputs;
  for (const auto &t : traces)
  {
    inputs.push_back(decopt::trace_input_from_arg(t));
  }
  if (out_path.empty())
  {
    decopt::emit_comparison(inputs, x, std::cout);
    return kOk;
  }
  std::ofstream out(out_path);
  if (!out)
  {
    throw decopt::RuntimeFailure("cannot write '" + out_path + "'");
  }
  decopt::emit_comparison(inputs, x, out);
  return kOk;
}

int cmd_validate_topology(const std::string &path)
{
  const auto m = decopt::load_weights_file(path);
  std::cout << "n = " << m.size() << "\n"
            << "lambda2 = " << decopt::format_double(m.lambda2()) << "\n"
            << "gamma = " << decopt::format_double(m.gamma()) << "\n"
            << "min_eigenvalue = " << decopt::format_double(m.min_eigenvalue()) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Decentralized nonsmooth optimization experiments"};
  app.require_subcommand(1);

  std::string config_path, topo_path, axis = "samples", out_path;
  bool dry_run = false;
  std::vector<std::string> traces;

  auto *run = app.add_subcommand("run", "Run every seed and grid cell of a config");
  run->add_option("config", config_path, "Config file")->required();
  run->add_flag("--dry-run", dry_run, "Same as plan");

  auto *plan = app.add_subcommand("plan", "Print the resolved run plan without running");
  plan->add_option("config", config_path, "Config file")->required();

  auto *cmp = app.add_subcommand("compare", "Merge traces into one long-format CSV");
  cmp->add_option("traces", traces, "Trace files, optionally label=path")->required();
  cmp->add_option("--x-axis", axis, "samples, computation or communication");
  cmp->add_option("-o,--output", out_path, "Write to a file instead of stdout");

  auto *vt = app.add_subcommand("validate-topology", "Check a mixing-matrix file");
  vt->add_option("file", topo_path, "Whitespace-delimited weights")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try
  {
    if (run->parsed())
      return dry_run ? cmd_plan(config_path) : cmd_run(config_path);
    if (plan->parsed())
      return cmd_plan(config_path);
    if (cmp->parsed())
      return cmd_compare(traces, axis, out_path);
    return cmd_validate_topology(topo_path);
  }
  catch (const decopt::ConfigError &e)
  {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  catch (const std::exception &e)
  {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}
