#include "tpg/freq_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tpg {

const char* to_string(TfidfStrategy s) {
  switch (s) {
    case TfidfStrategy::MeanPerDialogue: return "mean_per_dialogue";
    case TfidfStrategy::WithinDialogue: return "within_dialogue";
    case TfidfStrategy::ClassicalIdf: return "classical_idf";
  }
  throw std::logic_error("unknown TfidfStrategy");
}

TfidfStrategy tfidf_strategy_from_string(const std::string& name) {
  if (name == "mean_per_dialogue") return TfidfStrategy::MeanPerDialogue;
  if (name == "within_dialogue") return TfidfStrategy::WithinDialogue;
  if (name == "classical_idf") return TfidfStrategy::ClassicalIdf;
  throw std::invalid_argument("unknown tfidf strategy: " + name);
}

FrequencyStats::FrequencyStats(int vocab_size) {
  if (vocab_size <= 0) throw std::invalid_argument("vocab_size must be positive");
  count_.assign(static_cast<size_t>(vocab_size), 0);
  presence_.assign(static_cast<size_t>(vocab_size), 0);
}

void FrequencyStats::check_token(int token) const {
  if (token < 0 || token >= vocab_size()) {
    throw std::out_of_range("token id outside vocabulary");
  }
}

void FrequencyStats::record_dialogue(std::span<const int> tokens) {
  for (int t : tokens) check_token(t);
  std::vector<bool> seen(count_.size(), false);
  for (int t : tokens) {
    count_[static_cast<size_t>(t)] += 1;
    seen[static_cast<size_t>(t)] = true;
  }
  for (size_t i = 0; i < seen.size(); ++i) {
    if (seen[i]) presence_[i] += 1;
  }
  dialogues_ += 1;
}

double FrequencyStats::tfidf(int token, TfidfStrategy strategy) const {
  check_token(token);
  const double c = static_cast<double>(count_[static_cast<size_t>(token)]);
  const double df = static_cast<double>(presence_[static_cast<size_t>(token)]);
  const double n = static_cast<double>(dialogues_);
  switch (strategy) {
    case TfidfStrategy::MeanPerDialogue:
      return c / std::max(1.0, n);
    case TfidfStrategy::WithinDialogue:
      return c / std::max(1.0, df);
    case TfidfStrategy::ClassicalIdf:
      return (c / std::max(1.0, n)) * std::log((1.0 + n) / (1.0 + df));
  }
  throw std::logic_error("unknown TfidfStrategy");
}

std::int64_t FrequencyStats::count(int token) const {
  check_token(token);
  return count_[static_cast<size_t>(token)];
}

std::int64_t FrequencyStats::presence(int token) const {
  check_token(token);
  return presence_[static_cast<size_t>(token)];
}

void FrequencyStats::restore(std::vector<std::int64_t> counts, std::vector<std::int64_t> presences,
                             std::int64_t dialogues) {
  if (counts.size() != count_.size() || presences.size() != presence_.size()) {
    throw std::invalid_argument("frequency stats size mismatch");
  }
  if (dialogues < 0) throw std::invalid_argument("dialogue count is negative");
  count_ = std::move(counts);
  presence_ = std::move(presences);
  dialogues_ = dialogues;
}

void TemperatureBounds::validate() const {
  const bool finite = std::isfinite(tau_min) && std::isfinite(tau_max) &&
                      std::isfinite(tfidf_min) && std::isfinite(tfidf_max);
  if (!finite) throw std::invalid_argument("temperature bounds must be finite");
  if (!(tau_min > 0.0)) throw std::invalid_argument("tau_min must be positive");
  if (!(tau_max >= tau_min)) throw std::invalid_argument("tau_max must be >= tau_min");
  if (!(tfidf_max > tfidf_min)) throw std::invalid_argument("tfidf_max must exceed tfidf_min");
}

double dynamic_temperature(double tfidf, const TemperatureBounds& bounds) {
  bounds.validate();
  if (!std::isfinite(tfidf)) throw std::invalid_argument("tfidf must be finite");
  const double span = bounds.tfidf_max - bounds.tfidf_min;
  const double t = (tfidf - bounds.tfidf_min) / span;
  const double tau = bounds.tau_min + (bounds.tau_max - bounds.tau_min) * t;
  return std::clamp(tau, bounds.tau_min, bounds.tau_max);
}

}  // namespace tpg
