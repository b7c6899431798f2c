#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tpg/agents.hpp"
#include "tpg/freq_stats.hpp"
#include "tpg/game.hpp"
#include "tpg/tape.hpp"

namespace tpg {

enum class Variant { Reinforce, SingleTpg, ParallelTpg, DynamicTpg };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct TrainerConfig {
  Variant variant = Variant::Reinforce;
  // Fixed sampling temperature of the single-temperature variant.
  double tau_global = 1.5;
  // One concurrent rollout per entry for the parallel variant.
  std::vector<double> parallel_temperatures = {1.0, 1.5};
  TemperatureBounds bounds{};
  TfidfStrategy tfidf_strategy = TfidfStrategy::MeanPerDialogue;
  double qgen_lr = 0.001;
  double guesser_lr = 0.0001;
  int batch_size = 64;
  int max_questions = 8;
  int max_words = 12;  // per question, terminator included
  int epochs = 40;
  int worlds_per_epoch = 512;
  // "spread the reward uniformly": same scalar advantage on every action by
  // default; switch on to divide it by the episode's action count.
  bool divide_advantage_by_length = false;
  // Parallel variant: score each rollout by its own reward by default;
  // switch on to give every rollout the batch's mean reward instead.
  bool parallel_shared_reward = false;
  std::uint64_t master_seed = 1;

  void validate() const;
  bool operator==(const TrainerConfig&) const = default;
};

// Running mean of episode rewards. baseline() is the mean over everything
// recorded so far, 0 before the first episode; the advantage for an episode
// must be computed before that episode's reward is recorded.
struct BaselineTracker {
  std::int64_t episodes = 0;
  double reward_sum = 0.0;

  double baseline() const {
    return episodes == 0 ? 0.0 : reward_sum / static_cast<double>(episodes);
  }
};

// Records the reward and returns the new baseline.
double baseline_update(BaselineTracker& tracker, double reward);

struct TokenEvent {
  int token = 0;
  double temperature = 1.0;
  bool forced = false;  // cap-induced terminator: not sampled, no eligibility
};

struct QuestionRecord {
  std::vector<TokenEvent> events;  // terminator included
  Answer answer = Answer::NotApplicable;

  std::vector<int> tokens() const;
};

struct EpisodeRecord {
  GameWorld world;
  std::vector<QuestionRecord> questions;  // completed, oracle-answered questions
  // Sampled tokens of an unfinished final segment (ends with <eod>), dropped
  // from the dialogue but still credited as actions.
  std::vector<TokenEvent> trailing;
  int guess = -1;
  double reward = 0.0;
  bool greedy = false;
  std::uint64_t sampling_seed = 0;

  int dialogue_length() const { return static_cast<int>(questions.size()); }
  int sampled_action_count() const;
  double mean_temperature() const;  // over sampled tokens; 1.0 when none
  std::vector<DialogueTurn> turns() const;
  std::vector<int> sampled_tokens() const;
};

enum class RolloutMode { Sample, Greedy };

// Tape handles for one traced episode. qgen_logprob_sum is the sum of
// ln pmf[token] over the sampled (non-forced) tokens, evaluated on the
// untempered pmf: temperature shapes sampling only, never the eligibility.
struct RolloutTrace {
  EpisodeRecord record;
  NodeId qgen_logprob_sum = -1;  // -1 when the episode sampled no token
  NodeId guesser_logprob = -1;
};

// Plays one episode, building the generator's trace on qgen_tape and the
// guesser's on guesser_tape so gradients can be pulled without a second
// forward pass. Greedy mode takes argmax everywhere and never touches the
// temperature machinery or rng. temperature_override pins every step's
// sampling temperature (the parallel variant's per-rollout setting).
RolloutTrace rollout_episode_on_tapes(Tape& qgen_tape, Tape& guesser_tape, QGenPolicy& qgen,
                                      GuesserNet& guesser, const GameWorld& world,
                                      const TrainerConfig& config, const FrequencyStats& stats,
                                      SeededRng& rng, RolloutMode mode,
                                      std::optional<double> temperature_override = {});

EpisodeRecord rollout_episode(QGenPolicy& qgen, GuesserNet& guesser, const GameWorld& world,
                              const TrainerConfig& config, const FrequencyStats& stats,
                              SeededRng& rng, RolloutMode mode);

// Rebuilds the exact op sequence of the recorded episode (same nodes in the
// same order as the original rollout), so gradients match the live trace bit
// for bit. No rng and no temperatures are involved.
RolloutTrace replay_episode_on_tapes(Tape& qgen_tape, Tape& guesser_tape, QGenPolicy& qgen,
                                     GuesserNet& guesser, const EpisodeRecord& record);

// Accumulates one episode's policy gradients into both stores: every sampled
// generator token's eligibility scaled by (reward - baseline), the guess's
// eligibility scaled by the raw reward (no baseline).
void accumulate_episode_gradients(Tape& qgen_tape, Tape& guesser_tape, QGenPolicy& qgen,
                                  GuesserNet& guesser, const RolloutTrace& trace, double baseline,
                                  const TrainerConfig& config);

// Single-episode update: replay, accumulate with the tracker's current
// baseline, record the reward, one step per agent. Grads are cleared first,
// so the update is exactly this episode's.
void reinforce_update(const EpisodeRecord& episode, BaselineTracker& tracker, QGenPolicy& qgen,
                      GuesserNet& guesser, const TrainerConfig& config);

// One update from a group of same-world rollouts, one per configured
// temperature, all generated under the same frozen parameters: contributions
// summed in temperature-index order, then a single step per agent.
void parallel_update(std::span<const EpisodeRecord> episodes, BaselineTracker& tracker,
                     QGenPolicy& qgen, GuesserNet& guesser, const TrainerConfig& config);

struct EpochMetrics {
  int epoch = 0;
  Variant variant = Variant::Reinforce;
  double success_rate = 0.0;
  double mean_dialogue_len = 0.0;
  double mean_temperature = 1.0;
  double baseline = 0.0;
  double wall_ms = 0.0;
};

// One pass of worlds_per_epoch seeded worlds: rollout, per-episode gradient
// accumulation and baseline/statistics bookkeeping, one sgd step per agent
// every batch_size worlds. World and sampling seeds derive from
// (master_seed, epoch, world index) alone, so epochs are reproducible in
// isolation and a resumed run continues bit-identically.
EpochMetrics train_epoch(int epoch_index, QGenPolicy& qgen, GuesserNet& guesser,
                         const WorldConfig& world_config, const TrainerConfig& config,
                         FrequencyStats& stats, BaselineTracker& tracker);

inline constexpr const char* kMetricsHeader =
    "epoch,variant,success_rate,mean_dialogue_len,mean_temperature,baseline,wall_ms";

void append_metrics_row(std::ostream& out, const EpochMetrics& m);

// One-line JSON form of an episode (seeds, objects, token ids, temperatures,
// answers, guess, reward) for append-only episode logs.
std::string to_json_line(const EpisodeRecord& record, const Vocab& vocab);

}  // namespace tpg
