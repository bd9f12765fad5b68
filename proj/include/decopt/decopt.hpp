// SPDX-License-Identifier: Apache-2.0

// Umbrella header.

#ifndef DECOPT_DECOPT_HPP
#define DECOPT_DECOPT_HPP

#include "decopt/config.hpp"
#include "decopt/data.hpp"
#include "decopt/driver.hpp"
#include "decopt/error.hpp"
#include "decopt/estimators.hpp"
#include "decopt/experiment.hpp"
#include "decopt/gossip.hpp"
#include "decopt/metrics.hpp"
#include "decopt/planner.hpp"
#include "decopt/problem.hpp"
#include "decopt/random.hpp"
#include "decopt/topology.hpp"
#include "decopt/types.hpp"
#include "decopt/update.hpp"

#endif  // DECOPT_DECOPT_HPP
