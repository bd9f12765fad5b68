// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_UPDATE_HPP
#define DECOPT_UPDATE_HPP

#include "decopt/types.hpp"

namespace decopt
{

// Closed-form online step on the D-ball, scaled by the client count:
//   v = delta_half - eta g,   returns scale * min(1, D / |v|) * v.
// The ball-constrained argmin of <x, g> + |x - delta_half|^2 / (2 eta) is the
// projection of v, so result / scale is that minimizer. v = 0 gives 0.
inline Vector inner_update(const Vector &delta_half, const Vector &g, double eta,
                           double clip_radius, double scale)
{
  Vector v = delta_half - eta * g;
  const double norm = v.norm();
  const double factor = norm > clip_radius ? clip_radius / norm : 1.0;
  v *= scale * factor;
  return v;
}

}  // namespace decopt

#endif  // DECOPT_UPDATE_HPP
