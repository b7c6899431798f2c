#pragma once

#include <span>
#include <vector>

#include "tpg/rng.hpp"

namespace tpg {

// Throws std::invalid_argument unless pmf is non-empty, finite, non-negative,
// and sums to 1 within tol.
void validate_pmf(std::span<const double> pmf, double tol = 1e-6);

// Tempered counterpart of pmf: p_i^(1/tau) / sum_j p_j^(1/tau), computed in
// log space so extreme probabilities survive the exponent. tau must be > 0.
// Zero entries stay exactly zero; the result sums to 1 up to rounding.
std::vector<double> temper(std::span<const double> pmf, double tau);

// First index attaining the maximum probability. Ignores temperature and rng
// on purpose: greedy decoding must not depend on either.
int greedy_index(std::span<const double> pmf);

// Inverse-CDF lookup: smallest i with u < cumsum(pmf)[i]. u in [0, 1).
// Rounding in the cumulative sum can leave the total slightly below u; the
// last index with positive mass is returned in that case.
int sample_index(std::span<const double> pmf, double u);

// sample_index driven by one uniform draw from rng.
int sample_categorical(std::span<const double> pmf, SeededRng& rng);

}  // namespace tpg
