#pragma once

#include <functional>

#include "tpg/param_store.hpp"

namespace tpg {

// Compares the analytic gradient already accumulated in `store` against
// central differences of `eval`, which must be a deterministic function of
// the store's current values (typically: rebuild a tape, return ln f(action)).
//
// Returns max over probed coordinates of
//   |analytic - central| / max(1e-8, |central|).
//
// Probes up to coords_per_block coordinates of every block, chosen by `rng`
// (all coordinates when a block is small enough). epsilon must lie in
// [1e-7, 1e-3]. Throws std::runtime_error if two evaluations at the same
// parameters disagree.
double finite_diff_check(ParamStore& store, const std::function<double()>& eval, double epsilon,
                         SeededRng& rng, int coords_per_block = 8);

}  // namespace tpg
