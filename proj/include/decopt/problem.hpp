// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_PROBLEM_HPP
#define DECOPT_PROBLEM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "decopt/data.hpp"
#include "decopt/error.hpp"
#include "decopt/random.hpp"
#include "decopt/types.hpp"

namespace decopt
{

//
// Finite-sum local objectives f_i(x) = mean_j F_i(x; xi_j) over client i's shard, and
// the global objective f = (1/n) sum_i f_i. Implementations are immutable after
// construction and may be shared across threads.
//
class Problem
{
public:
  virtual ~Problem() = default;

  virtual std::string_view kind() const = 0;
  virtual std::size_t shard_size(std::size_t client) const = 0;

  // F_i(x; xi_j).
  virtual double value(std::size_t client, std::size_t sample, const Vector &x) const = 0;

  // out += scale * (a subgradient of F_i(.; xi_j) at x).
  virtual void add_subgradient(std::size_t client, std::size_t sample, const Vector &x,
                               double scale, Vector &out) const = 0;

  // Lipschitz constant of F_i(.; xi_j).
  virtual double sample_lipschitz(std::size_t client, std::size_t sample) const = 0;

  std::size_t dim() const { return dim_; }
  std::size_t clients() const { return clients_; }

  // L and G used by the parameter planner.
  double lipschitz() const { return lipschitz_; }
  double grad_bound() const { return grad_bound_; }

  Vector subgradient(std::size_t client, std::size_t sample, const Vector &x) const
  {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
    add_subgradient(client, sample, x, 1.0, g);
    return g;
  }

  virtual double local_value(std::size_t client, const Vector &x) const
  {
    const std::size_t m = shard_size(client);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j)
    {
      s += value(client, j, x);
    }
    return s / static_cast<double>(m);
  }

  virtual void add_local_subgradient(std::size_t client, const Vector &x, double scale,
                                     Vector &out) const
  {
    const std::size_t m = shard_size(client);
    const double w = scale / static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j)
    {
      add_subgradient(client, j, x, w, out);
    }
  }

  Vector local_subgradient(std::size_t client, const Vector &x) const
  {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
    add_local_subgradient(client, x, 1.0, g);
    return g;
  }

  double objective(const Vector &x) const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < clients_; ++i)
    {
      s += local_value(i, x);
    }
    return s / static_cast<double>(clients_);
  }

  // Deterministic full-data subgradient of f.
  Vector full_subgradient(const Vector &x) const
  {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(dim_));
    const double w = 1.0 / static_cast<double>(clients_);
    for (std::size_t i = 0; i < clients_; ++i)
    {
      add_local_subgradient(i, x, w, g);
    }
    return g;
  }

protected:
  Problem(std::size_t dim, std::size_t clients) : dim_(dim), clients_(clients) {}

  void set_constants(double lipschitz, double grad_bound)
  {
    lipschitz_ = lipschitz;
    grad_bound_ = grad_bound;
  }

  void check_index(std::size_t client, std::size_t sample) const
  {
    if (client >= clients_)
    {
      throw std::out_of_range("client " + std::to_string(client) + " out of range (n = " +
                              std::to_string(clients_) + ")");
    }
    if (sample >= shard_size(client))
    {
      throw std::out_of_range("sample " + std::to_string(sample) + " out of range for client " +
                              std::to_string(client));
    }
  }

private:
  std::size_t dim_, clients_;
  double lipschitz_ = 1.0, grad_bound_ = 1.0;
};

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

//
// Hinge loss with capped-l1 penalty:
//   F(x; (a, b)) = max(1 - b a^T x, 0) + lambda sum_j min(|x_j|, alpha).
// Subgradient ties: margin exactly 1 takes the active hinge branch; the penalty uses
// sign(0) = 0 and contributes nothing once |x_j| >= alpha.
//
class CappedL1Svm final : public Problem
{
public:
  CappedL1Svm(std::shared_ptr<const std::vector<DataSample>> data,
              std::vector<std::vector<std::size_t>> shards, std::size_t dim, double lambda,
              double alpha)
    : Problem(dim, shards.size()), data_(std::move(data)), shards_(std::move(shards)),
      lambda_(lambda), alpha_(alpha)
  {
    if (!(lambda_ > 0.0) || !(alpha_ > 0.0))
    {
      throw ConfigError("capped_l1_svm: lambda and alpha must be positive");
    }
    if (shards_.empty())
    {
      throw ConfigError("capped_l1_svm: no clients");
    }
    double bound = 0.0;
    const double pen = lambda_ * std::sqrt(static_cast<double>(dim));
    for (const auto &s : shards_)
    {
      if (s.empty())
      {
        throw ConfigError("capped_l1_svm: empty client shard");
      }
      for (std::size_t idx : s)
      {
        const DataSample &ds = data_->at(idx);
        if (!ds.indices.empty() && ds.indices.back() >= dim)
        {
          throw ConfigError("capped_l1_svm: sample " + std::to_string(idx) +
                            " has a feature index beyond d = " + std::to_string(dim));
        }
        bound = std::max(bound, ds.norm() + pen);
      }
    }
    set_constants(bound, bound);
  }

  // Even split of `data` across `clients`, with lambda defaulting to 1e-5 / m.
  static std::shared_ptr<CappedL1Svm> from_dataset(std::vector<DataSample> data,
                                                   std::size_t clients, std::size_t dim,
                                                   std::uint64_t shard_seed, double lambda = 0.0,
                                                   double alpha = 2.0)
  {
    if (lambda <= 0.0)
    {
      lambda = 1e-5 / static_cast<double>(data.size());
    }
    auto shards = shard(data.size(), clients, shard_seed);
    auto shared = std::make_shared<const std::vector<DataSample>>(std::move(data));
    return std::make_shared<CappedL1Svm>(std::move(shared), std::move(shards), dim, lambda, alpha);
  }

  std::string_view kind() const override { return "capped_l1_svm"; }
  std::size_t shard_size(std::size_t client) const override { return shards_.at(client).size(); }

  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  const DataSample &sample(std::size_t client, std::size_t j) const
  {
    return (*data_)[shards_[client][j]];
  }

  double penalty(const Vector &x) const
  {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j)
    {
      s += std::min(std::abs(x(j)), alpha_);
    }
    return lambda_ * s;
  }

  double hinge(const DataSample &s, const Vector &x) const
  {
    return std::max(1.0 - static_cast<double>(s.label) * s.dot(x), 0.0);
  }

  double value(std::size_t client, std::size_t j, const Vector &x) const override
  {
    check_index(client, j);
    return hinge(sample(client, j), x) + penalty(x);
  }

  void add_subgradient(std::size_t client, std::size_t j, const Vector &x, double scale,
                       Vector &out) const override
  {
    check_index(client, j);
    add_hinge_subgradient(sample(client, j), x, scale, out);
    add_penalty_subgradient(x, scale, out);
  }

  double sample_lipschitz(std::size_t client, std::size_t j) const override
  {
    check_index(client, j);
    return sample(client, j).norm() + lambda_ * std::sqrt(static_cast<double>(dim()));
  }

  // The penalty is sample-independent, so evaluate it once per shard.
  double local_value(std::size_t client, const Vector &x) const override
  {
    const auto &s = shards_.at(client);
    double h = 0.0;
    for (std::size_t idx : s)
    {
      h += hinge((*data_)[idx], x);
    }
    return h / static_cast<double>(s.size()) + penalty(x);
  }

  void add_local_subgradient(std::size_t client, const Vector &x, double scale,
                             Vector &out) const override
  {
    const auto &s = shards_.at(client);
    const double w = scale / static_cast<double>(s.size());
    for (std::size_t idx : s)
    {
      add_hinge_subgradient((*data_)[idx], x, w, out);
    }
    add_penalty_subgradient(x, scale, out);
  }

private:
  void add_hinge_subgradient(const DataSample &s, const Vector &x, double scale,
                             Vector &out) const
  {
    const double b = static_cast<double>(s.label);
    if (b * s.dot(x) <= 1.0)
    {
      for (std::size_t k = 0; k < s.indices.size(); ++k)
      {
        out(static_cast<Eigen::Index>(s.indices[k])) -= scale * b * s.values[k];
      }
    }
  }

  void add_penalty_subgradient(const Vector &x, double scale, Vector &out) const
  {
    for (Eigen::Index j = 0; j < x.size(); ++j)
    {
      if (std::abs(x(j)) < alpha_)
      {
        out(j) += scale * lambda_ * sign0(x(j));
      }
    }
  }

  std::shared_ptr<const std::vector<DataSample>> data_;
  std::vector<std::vector<std::size_t>> shards_;
  double lambda_, alpha_;
};

//
// Synthetic nonsmooth test problem. Each sample is
//   F(x) = |c^T x + e| + max(a1^T x + b1, a2^T x + b2),
// whose uniform-ball smoothing reduces to one-dimensional integrals, so smoothed
// gradients can be computed independently of any estimator. Linear functions are the
// special case c = 0, a1 = a2.
//
struct PiecewiseSample
{
  Vector c;
  double e = 0.0;
  Vector a1;
  double b1 = 0.0;
  Vector a2;
  double b2 = 0.0;
};

class PiecewiseProblem final : public Problem
{
public:
  PiecewiseProblem(std::size_t dim, std::vector<std::vector<PiecewiseSample>> shards)
    : Problem(dim, shards.size()), shards_(std::move(shards))
  {
    if (shards_.empty())
    {
      throw ConfigError("synthetic_piecewise: no clients");
    }
    double bound = 0.0;
    for (const auto &s : shards_)
    {
      if (s.empty())
      {
        throw ConfigError("synthetic_piecewise: empty client shard");
      }
      for (const auto &p : s)
      {
        const auto d = static_cast<Eigen::Index>(dim);
        if (p.c.size() != d || p.a1.size() != d || p.a2.size() != d)
        {
          throw ConfigError("synthetic_piecewise: sample dimension mismatch");
        }
        bound = std::max(bound, lipschitz_of(p));
      }
    }
    set_constants(bound, bound);
  }

  // Gaussian pieces scaled so each sample's Lipschitz constant is O(1).
  static std::shared_ptr<PiecewiseProblem> random(std::size_t clients, std::size_t dim,
                                                  std::size_t per_client, std::uint64_t seed)
  {
    Rng rng = make_stream(seed, Purpose::Data);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    const auto draw = [&] {
      Vector v(d);
      for (Eigen::Index j = 0; j < d; ++j)
      {
        v(j) = scale * gauss(rng);
      }
      return v;
    };
    std::vector<std::vector<PiecewiseSample>> shards(clients);
    for (auto &s : shards)
    {
      for (std::size_t j = 0; j < per_client; ++j)
      {
        PiecewiseSample p;
        p.c = draw();
        p.e = 0.5 * gauss(rng);
        p.a1 = draw();
        p.b1 = 0.5 * gauss(rng);
        p.a2 = draw();
        p.b2 = 0.5 * gauss(rng);
        s.push_back(std::move(p));
      }
    }
    return std::make_shared<PiecewiseProblem>(dim, std::move(shards));
  }

  static double lipschitz_of(const PiecewiseSample &p)
  {
    return p.c.norm() + std::max(p.a1.norm(), p.a2.norm());
  }

  std::string_view kind() const override { return "synthetic_piecewise"; }
  std::size_t shard_size(std::size_t client) const override { return shards_.at(client).size(); }
  const PiecewiseSample &sample(std::size_t client, std::size_t j) const
  {
    return shards_[client][j];
  }

  double value(std::size_t client, std::size_t j, const Vector &x) const override
  {
    check_index(client, j);
    const auto &p = shards_[client][j];
    return std::abs(p.c.dot(x) + p.e) + std::max(p.a1.dot(x) + p.b1, p.a2.dot(x) + p.b2);
  }

  void add_subgradient(std::size_t client, std::size_t j, const Vector &x, double scale,
                       Vector &out) const override
  {
    check_index(client, j);
    const auto &p = shards_[client][j];
    out += (scale * sign0(p.c.dot(x) + p.e)) * p.c;
    if (p.a1.dot(x) + p.b1 >= p.a2.dot(x) + p.b2)
    {
      out += scale * p.a1;
    }
    else
    {
      out += scale * p.a2;
    }
  }

  double sample_lipschitz(std::size_t client, std::size_t j) const override
  {
    check_index(client, j);
    return lipschitz_of(shards_[client][j]);
  }

private:
  std::vector<std::vector<PiecewiseSample>> shards_;
};

}  // namespace decopt

#endif  // DECOPT_PROBLEM_HPP
