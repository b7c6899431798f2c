#include "tpg/tempered.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tpg {

void validate_pmf(std::span<const double> pmf, double tol) {
  if (pmf.empty()) throw std::invalid_argument("pmf is empty");
  double sum = 0.0;
  for (double p : pmf) {
    if (!std::isfinite(p)) throw std::invalid_argument("pmf entry is not finite");
    if (p < 0.0) throw std::invalid_argument("pmf entry is negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("pmf does not sum to 1");
}

std::vector<double> temper(std::span<const double> pmf, double tau) {
  validate_pmf(pmf);
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("temperature must be finite and positive");
  }

  // log(0) = -inf flows through the arithmetic and exp(-inf) lands back on
  // exactly zero, so zero-mass entries need no special casing.
  std::vector<double> scaled(pmf.size());
  double max_scaled = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pmf.size(); ++i) {
    scaled[i] = std::log(pmf[i]) / tau;
    max_scaled = std::max(max_scaled, scaled[i]);
  }
  if (!std::isfinite(max_scaled)) throw std::invalid_argument("pmf has no positive mass");

  std::vector<double> out(pmf.size());
  for (size_t i = 0; i < pmf.size(); ++i) out[i] = std::exp(scaled[i] - max_scaled);

  // Summing the exponentials in value order keeps the normalizer identical
  // under any permutation of the support.
  std::vector<double> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  double norm = 0.0;
  for (double v : sorted) norm += v;
  for (double& v : out) v /= norm;
  return out;
}

int greedy_index(std::span<const double> pmf) {
  if (pmf.empty()) throw std::invalid_argument("pmf is empty");
  int best = 0;
  for (size_t i = 1; i < pmf.size(); ++i) {
    if (pmf[i] > pmf[static_cast<size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int sample_index(std::span<const double> pmf, double u) {
  if (pmf.empty()) throw std::invalid_argument("pmf is empty");
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("u outside [0, 1)");
  double cum = 0.0;
  int last_positive = -1;
  for (size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] > 0.0) last_positive = static_cast<int>(i);
    cum += pmf[i];
    if (u < cum) return static_cast<int>(i);
  }
  if (last_positive < 0) throw std::invalid_argument("pmf has no positive mass");
  return last_positive;
}

int sample_categorical(std::span<const double> pmf, SeededRng& rng) {
  return sample_index(pmf, rng.uniform01());
}

}  // namespace tpg
