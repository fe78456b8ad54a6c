#pragma once

#include <cstdint>

#include "ddctmc/generator.hpp"
#include "ddctmc/quantities.hpp"

namespace ddctmc {

struct McConfig
{
  long n_paths = 100000;
  std::uint64_t seed = 42;
  double horizon_cap = 200.0; // years
  int threads = 0;
};

struct McResult
{
  double estimate = 0.0;
  double std_error = 0.0;
  double truncated_fraction = 0.0;
};

// Exact path simulation of the CTMC with running max/min, event counters and recovery flags.
// Each path uses its own generator seeded from (seed, path index), so results do not depend on
// the thread count. Requires real q, k and payoffs.
McResult mc_estimate(const Generator &gen, const QuantityRequest &req, const McConfig &cfg);

// One sparse solve of the first-passage system on the augmented chain (position, max[, min][, counters]).
// Throws TooLarge when more than max_states product states are reachable.
cplx dense_product_solve(const Generator &gen, const QuantityRequest &req, int max_states = 20000);

// Number of reachable product states for the request.
int product_state_count(const Generator &gen, const QuantityRequest &req, int max_states = 20000);

} // namespace ddctmc
