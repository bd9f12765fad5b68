// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_PLANNER_HPP
#define DECOPT_PLANNER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>

#include "decopt/error.hpp"
#include "decopt/estimators.hpp"
#include "decopt/gossip.hpp"

namespace decopt
{

// Every scalar that drives one run.
struct RunPlan
{
  double delta = 0.0;        // Goldstein radius
  double epsilon = 0.0;      // target stationarity
  double delta_prime = 0.0;  // estimator smoothing radius
  std::size_t K = 1;         // epochs
  std::size_t T = 1;         // steps per epoch
  std::size_t R = 1;         // gossip rounds per mixing
  double eta = 0.0;          // step size
  double D = 0.0;            // clip radius
  double eps_prime = 0.0;    // consensus tolerance
  OracleType oracle = OracleType::First;
  std::uint64_t seed = 0;
  std::size_t n = 1;
  std::size_t d = 1;
  // True when R came from plan_rounds, i.e. the eps' consensus guarantee applies.
  bool rounds_planned = false;

  bool operator==(const RunPlan &) const = default;
};

inline void validate(const RunPlan &p)
{
  if (!(p.delta > 0.0) || !(p.epsilon > 0.0))
  {
    throw ConfigError("plan: delta and epsilon must be positive");
  }
  if (!(p.delta_prime >= 0.0))
  {
    throw ConfigError("plan: delta_prime must be nonnegative");
  }
  if (p.oracle == OracleType::Zeroth && !(p.delta_prime > 0.0))
  {
    throw ConfigError("plan: zeroth-order oracle needs delta_prime > 0");
  }
  if (!(p.eta > 0.0) || !(p.D > 0.0))
  {
    throw ConfigError("plan: eta and D must be positive");
  }
  if (!(p.eps_prime > 0.0 && p.eps_prime < p.D))
  {
    throw ConfigError("plan: eps_prime must satisfy 0 < eps_prime < D (consensus-round "
                      "precondition)");
  }
  if (p.K < 1 || p.T < 1 || p.R < 1)
  {
    throw ConfigError("plan: K, T and R must be at least 1");
  }
  if (p.n < 1 || p.d < 1)
  {
    throw ConfigError("plan: n and d must be at least 1");
  }
}

struct PlannerInputs
{
  double delta = 0.1;
  double epsilon = 0.1;
  std::size_t n = 1;
  std::size_t d = 1;
  double gamma = 1.0;
  double L = 1.0;
  double G = 1.0;
  OracleType oracle = OracleType::First;
  std::optional<double> delta_prime;  // default delta / 2
  std::optional<double> sigma;        // variance bound, default G
  double c0 = 1.0;                    // smoothing-gradient constant
  double nu = 1.0;                    // f(0) - inf f
  std::uint64_t seed = 0;
};

// Direct values that replace planner outputs. Quantities downstream of an override are
// re-derived from it (e.g. forcing T changes D = delta / 4T unless D is forced too).
struct PlanOverrides
{
  std::optional<double> eta, D, eps_prime;
  std::optional<std::size_t> R, K, T;
};

namespace detail
{

inline std::size_t ceil_count(double v, const char *what)
{
  if (!std::isfinite(v) || v > 1e15)
  {
    throw ConfigError(std::string("plan: ") + what + " is too large to run (" +
                      std::to_string(v) + ")");
  }
  return static_cast<std::size_t>(std::ceil(v));
}

}  // namespace detail

//
// Theory-driven parameters:
//   first order:  h = sigma/sqrt(n) + G + 3 c0 L,           T = max(ceil(9 h^2 / eps^2), 7)
//   zeroth order: h3 = sqrt(16 sqrt(2 pi)) L,
//                 h = h3/sqrt(n) + h3 + 3 c0 L,             T = max(ceil(9 h^2 d / eps^2), 7)
//   K = ceil(24 (nu + L) / (delta eps)),  D = delta / (4T),  eta = D / (G' sqrt T)
//   eps' = min((T-6)/(3T+6) D, (27 c0 L sqrt(d)/(2 delta) + 4 (G'+L) T/delta
//                               + 10 G' T^1.5 / delta)^-1 eps/3)
//   R = plan_rounds(gamma, n, D, eps')
// where G' is G for first order and h3 (the two-point estimator's moment bound) for
// zeroth order.
//
inline RunPlan plan_parameters(const PlannerInputs &in, const PlanOverrides &ov = {})
{
  if (!(in.delta > 0.0) || !(in.epsilon > 0.0) || in.n < 1 || in.d < 1 || !(in.L > 0.0) ||
      !(in.G > 0.0) || !(in.c0 > 0.0) || !(in.nu >= 0.0))
  {
    throw ConfigError("plan_parameters: delta, epsilon, n, d, L, G, c0 must be positive");
  }
  if (!(in.gamma > 0.0 && in.gamma <= 1.0))
  {
    throw ConfigError("plan_parameters: gamma must lie in (0, 1]");
  }

  const double n = static_cast<double>(in.n);
  const double d = static_cast<double>(in.d);
  const double eps = in.epsilon;
  const double sigma = in.sigma.value_or(in.G);

  RunPlan p;
  p.delta = in.delta;
  p.epsilon = eps;
  p.delta_prime = in.delta_prime.value_or(in.delta / 2.0);
  p.oracle = in.oracle;
  p.seed = in.seed;
  p.n = in.n;
  p.d = in.d;

  double g_eff = in.G;
  double t_raw = 0.0;
  if (in.oracle == OracleType::First)
  {
    const double h = sigma / std::sqrt(n) + in.G + 3.0 * in.c0 * in.L;
    t_raw = 9.0 * h * h / (eps * eps);
  }
  else
  {
    const double h3 = std::sqrt(16.0 * std::sqrt(2.0 * std::numbers::pi)) * in.L;
    const double h = h3 / std::sqrt(n) + h3 + 3.0 * in.c0 * in.L;
    t_raw = 9.0 * h * h * d / (eps * eps);
    g_eff = h3;
  }
  p.T = ov.T ? *ov.T : std::max<std::size_t>(detail::ceil_count(t_raw, "T"), 7);
  p.K = ov.K ? *ov.K : detail::ceil_count(24.0 * (in.nu + in.L) / (in.delta * eps), "K");
  if (p.K == 0)
  {
    p.K = 1;
  }

  const double T = static_cast<double>(p.T);
  p.D = ov.D ? *ov.D : in.delta / (4.0 * T);
  p.eta = ov.eta ? *ov.eta : p.D / (g_eff * std::sqrt(T));

  if (ov.eps_prime)
  {
    p.eps_prime = *ov.eps_prime;
  }
  else
  {
    const double cap2 = (eps / 3.0) / (27.0 * in.c0 * in.L * std::sqrt(d) / (2.0 * in.delta) +
                                       4.0 * (g_eff + in.L) * T / in.delta +
                                       10.0 * g_eff * std::pow(T, 1.5) / in.delta);
    // The diameter cap needs T > 6; for a forced shorter epoch fall back to D / 2.
    const double cap1 = p.T > 6 ? (T - 6.0) / (3.0 * T + 6.0) * p.D : 0.5 * p.D;
    p.eps_prime = std::min(cap1, cap2);
  }
  if (!(p.eps_prime > 0.0 && p.eps_prime < p.D))
  {
    throw ConfigError("algorithm.eps_prime: must satisfy 0 < eps_prime < D (consensus-round "
                      "precondition)");
  }

  if (ov.R)
  {
    p.R = *ov.R;
    p.rounds_planned = false;
  }
  else if (in.n < 2)
  {
    p.R = 1;
    p.rounds_planned = true;
  }
  else
  {
    p.R = plan_rounds(in.gamma, in.n, p.D, p.eps_prime);
    p.rounds_planned = true;
  }
  validate(p);
  return p;
}

inline std::ostream &operator<<(std::ostream &os, const RunPlan &p)
{
  const auto old = os.precision(17);
  os << "delta = " << p.delta << "\n"
     << "epsilon = " << p.epsilon << "\n"
     << "delta_prime = " << p.delta_prime << "\n"
     << "oracle = " << to_string(p.oracle) << "\n"
     << "K = " << p.K << "\n"
     << "T = " << p.T << "\n"
     << "R = " << p.R << (p.rounds_planned ? " (planned)" : " (override)") << "\n"
     << "eta = " << p.eta << "\n"
     << "D = " << p.D << "\n"
     << "eps_prime = " << p.eps_prime << "\n"
     << "n = " << p.n << "\n"
     << "d = " << p.d << "\n"
     << "seed = " << p.seed << "\n";
  os.precision(old);
  return os;
}

}  // namespace decopt

#endif  // DECOPT_PLANNER_HPP
