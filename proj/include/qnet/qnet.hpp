#pragma once

// Umbrella header for the constrained-queueing scheduling library.

#include "qnet/capacity.hpp"
#include "qnet/config.hpp"
#include "qnet/expr_parser.hpp"
#include "qnet/kernels.hpp"
#include "qnet/linalg.hpp"
#include "qnet/markov.hpp"
#include "qnet/policies.hpp"
#include "qnet/potential_check.hpp"
#include "qnet/potentials.hpp"
#include "qnet/presets.hpp"
#include "qnet/processes.hpp"
#include "qnet/regions.hpp"
#include "qnet/rng.hpp"
#include "qnet/simplex.hpp"
#include "qnet/simulate.hpp"
#include "qnet/stats.hpp"
#include "qnet/topology.hpp"
