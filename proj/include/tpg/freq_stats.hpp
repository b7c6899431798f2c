#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tpg {

// How a token's usage statistic is reduced to one scalar.
//   MeanPerDialogue: total occurrences / dialogues recorded.
//   WithinDialogue:  total occurrences / dialogues that contain the token.
//   ClassicalIdf:    MeanPerDialogue scaled by ln((1+N)/(1+df)).
enum class TfidfStrategy { MeanPerDialogue, WithinDialogue, ClassicalIdf };

const char* to_string(TfidfStrategy s);
TfidfStrategy tfidf_strategy_from_string(const std::string& name);

// Running token-usage statistics over completed dialogues. Counts only what
// record_dialogue was given; the caller decides which tokens count (sampled
// generator output, not forced or oracle tokens).
class FrequencyStats {
 public:
  explicit FrequencyStats(int vocab_size);

  void record_dialogue(std::span<const int> tokens);
  double tfidf(int token, TfidfStrategy strategy) const;

  int vocab_size() const { return static_cast<int>(count_.size()); }
  std::int64_t dialogues() const { return dialogues_; }
  std::int64_t count(int token) const;
  std::int64_t presence(int token) const;

  // Checkpoint plumbing: raw state out and back in.
  const std::vector<std::int64_t>& counts() const { return count_; }
  const std::vector<std::int64_t>& presences() const { return presence_; }
  void restore(std::vector<std::int64_t> counts, std::vector<std::int64_t> presences,
               std::int64_t dialogues);

 private:
  void check_token(int token) const;

  std::vector<std::int64_t> count_;
  std::vector<std::int64_t> presence_;
  std::int64_t dialogues_ = 0;
};

// Linear map from a tfidf score onto [tau_min, tau_max], saturating outside
// [tfidf_min, tfidf_max].
struct TemperatureBounds {
  double tau_min = 0.5;
  double tau_max = 1.5;
  double tfidf_min = 0.0;
  double tfidf_max = 8.0;

  void validate() const;
  bool operator==(const TemperatureBounds&) const = default;
};

double dynamic_temperature(double tfidf, const TemperatureBounds& bounds);

}  // namespace tpg
