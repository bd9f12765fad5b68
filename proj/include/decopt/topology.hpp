// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_TOPOLOGY_HPP
#define DECOPT_TOPOLOGY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "decopt/error.hpp"
#include "decopt/types.hpp"

namespace decopt
{

//
// Symmetric doubly stochastic gossip matrix with 0 <= P <= I and a positive spectral
// gap. Immutable once built; the only way to obtain one is through the factories
// below, all of which funnel into from_weights() for validation.
//
class MixingMatrix
{
public:
  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  const DenseMatrix &weights() const { return weights_; }
  double weight(std::size_t i, std::size_t j) const
  {
    return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  // Second-largest eigenvalue, clamped to [0, 1).
  double lambda2() const { return lambda2_; }
  double gamma() const { return gamma_; }
  double min_eigenvalue() const { return min_eig_; }
  double max_eigenvalue() const { return max_eig_; }

  friend MixingMatrix from_weights(const DenseMatrix &raw);

private:
  MixingMatrix() = default;

  DenseMatrix weights_;
  double lambda2_ = 0.0, gamma_ = 1.0, min_eig_ = 1.0, max_eig_ = 1.0;
};

namespace detail
{

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kEigenTol = 1e-10;

inline std::string idx(std::size_t i, std::size_t j)
{
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace detail

// Validates every mixing-matrix invariant and computes the spectrum by dense symmetric
// eigendecomposition. A 1 x 1 matrix [1] is the trivial single-client network; it has
// no second eigenvalue and is given lambda2 = 0, gamma = 1.
inline MixingMatrix from_weights(const DenseMatrix &raw)
{
  using V = ValidationError::Violation;
  const auto n = static_cast<std::size_t>(raw.rows());
  if (raw.rows() != raw.cols() || n == 0)
  {
    throw ValidationError(V::NotSquare, n, static_cast<std::size_t>(raw.cols()),
                          "mixing matrix must be square and nonempty, got " +
                              std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = 0; j < n; ++j)
    {
      const double v = raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!std::isfinite(v))
      {
        throw ValidationError(V::NonFinite, i, j, "non-finite weight at " + detail::idx(i, j));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = i + 1; j < n; ++j)
    {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      if (std::abs(raw(ii, jj) - raw(jj, ii)) > detail::kSymmetryTol)
      {
        throw ValidationError(V::Asymmetric, i, j,
                              "asymmetric weights at " + detail::idx(i, j) + " vs " +
                                  detail::idx(j, i));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    for (std::size_t j = 0; j < n; ++j)
    {
      if (raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < 0.0)
      {
        throw ValidationError(V::NegativeEntry, i, j,
                              "negative weight at " + detail::idx(i, j));
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    const double s = raw.row(static_cast<Eigen::Index>(i)).sum();
    if (std::abs(s - 1.0) > detail::kRowSumTol)
    {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << i << " sums to " << s << ", expected 1";
      throw ValidationError(V::RowSum, i, n, msg.str());
    }
  }

  MixingMatrix m;
  m.weights_ = raw;
  if (n == 1)
  {
    return m;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(raw),
                                                     Eigen::EigenvaluesOnly);
  // Ascending order.
  const Eigen::VectorXd &ev = eig.eigenvalues();
  m.min_eig_ = ev(0);
  m.max_eig_ = ev(ev.size() - 1);
  if (m.min_eig_ < -detail::kEigenTol || m.max_eig_ > 1.0 + detail::kEigenTol)
  {
    std::ostringstream msg;
    msg.precision(17);
    msg << "eigenvalues must lie in [0, 1], found range [" << m.min_eig_ << ", " << m.max_eig_
        << "]";
    throw ValidationError(V::EigenvalueRange, n, n, msg.str());
  }
  m.lambda2_ = std::max(0.0, ev(ev.size() - 2));
  m.gamma_ = 1.0 - m.lambda2_;
  if (m.gamma_ <= detail::kEigenTol)
  {
    throw ValidationError(V::Disconnected, n, n,
                          "disconnected network: spectral gap is zero (lambda2 = 1)");
  }
  return m;
}

// Circulant ring: self-weight 1/2, remaining 1/2 split evenly over the k nearest
// neighbors on each side. Diagonal dominance keeps the spectrum inside [0, 1].
inline MixingMatrix build_ring(std::size_t n, std::size_t neighbors_per_side)
{
  if (n < 3)
  {
    throw ConfigError("topology.n: ring needs at least 3 clients, got " + std::to_string(n));
  }
  if (neighbors_per_side < 1)
  {
    throw ConfigError("topology.neighbors_per_side: must be positive");
  }
  if (2 * neighbors_per_side + 1 > n)
  {
    throw ConfigError("topology.neighbors_per_side: " + std::to_string(neighbors_per_side) +
                      " neighbors per side do not fit in a ring of " + std::to_string(n));
  }
  const auto nn = static_cast<Eigen::Index>(n);
  const auto k = static_cast<Eigen::Index>(neighbors_per_side);
  const double w = 0.25 / static_cast<double>(neighbors_per_side);
  DenseMatrix p = DenseMatrix::Zero(nn, nn);
  for (Eigen::Index i = 0; i < nn; ++i)
  {
    p(i, i) = 0.5;
    for (Eigen::Index s = 1; s <= k; ++s)
    {
      p(i, (i + s) % nn) += w;
      p(i, (i - s + nn) % nn) += w;
    }
  }
  return from_weights(p);
}

inline MixingMatrix build_complete(std::size_t n)
{
  if (n < 2)
  {
    throw ConfigError("topology.n: complete graph needs at least 2 clients, got " +
                      std::to_string(n));
  }
  const auto nn = static_cast<Eigen::Index>(n);
  return from_weights(DenseMatrix::Constant(nn, nn, 1.0 / static_cast<double>(n)));
}

// The single-client network P = [1].
inline MixingMatrix build_single() { return from_weights(DenseMatrix::Ones(1, 1)); }

inline double spectral_gap(const MixingMatrix &m) { return m.gamma(); }

// Whitespace-delimited n x n text matrix, one row per nonempty line.
inline DenseMatrix read_weights_text(std::istream &in)
{
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok)
    {
      std::size_t pos = 0;
      double v = 0.0;
      try
      {
        v = std::stod(tok, &pos);
      }
      catch (const std::exception &)
      {
        pos = 0;
      }
      if (pos != tok.size())
      {
        throw ConfigError("topology file line " + std::to_string(lineno) +
                          ": not a number: '" + tok + "'");
      }
      row.push_back(v);
    }
    if (!row.empty())
    {
      rows.push_back(std::move(row));
    }
  }
  const std::size_t n = rows.size();
  if (n == 0)
  {
    throw ConfigError("topology file: no rows");
  }
  DenseMatrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
  {
    if (rows[i].size() != n)
    {
      throw ConfigError("topology file: row " + std::to_string(i) + " has " +
                        std::to_string(rows[i].size()) + " entries, expected " +
                        std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j)
    {
      p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return p;
}

inline MixingMatrix load_weights_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw ConfigError("topology.path: cannot open '" + path + "'");
  }
  return from_weights(read_weights_text(in));
}

}  // namespace decopt

#endif  // DECOPT_TOPOLOGY_HPP
