#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tpg/agents.hpp"
#include "tpg/audit.hpp"
#include "tpg/game.hpp"
#include "tpg/run_config.hpp"
#include "tpg/trainer.hpp"

namespace tpg {

// Fixed file layout under a run's output directory.
struct RunPaths {
  std::string output_dir;

  std::string pretrain_checkpoint() const { return output_dir + "/pretrain.ckpt"; }
  std::string train_checkpoint() const { return output_dir + "/train.ckpt"; }
  std::string losses_csv() const { return output_dir + "/losses.csv"; }
  std::string metrics_csv() const { return output_dir + "/metrics.csv"; }
  std::string vocab_file() const { return output_dir + "/vocab.txt"; }
  std::string episodes_log() const { return output_dir + "/episodes.jsonl"; }
};

void ensure_output_dir(const std::string& dir);

// Plays the scripted expert against the oracle and keeps the dialogue only
// if the consistency guess then recovers the target, so the cloning pool
// contains solved games exclusively.
std::optional<ExpertEpisode> expert_episode(const GameWorld& world, const Vocab& vocab);

struct PretrainStep {
  int step = 0;
  double qgen_nll = 0.0;
  double guesser_nll = 0.0;
};

struct PretrainResult {
  int pool_size = 0;
  std::vector<PretrainStep> steps;

  double initial_qgen_nll() const { return steps.empty() ? 0.0 : steps.front().qgen_nll; }
  double final_qgen_nll() const { return steps.empty() ? 0.0 : steps.back().qgen_nll; }
};

// Behavior cloning on freshly drawn expert dialogues: assembles a pool of
// config.pretrain_episodes solved games, then runs config.pretrain_passes
// passes of batched NLL steps on both agents. A zero-episode budget takes no
// step and leaves the agents at their initialization.
PretrainResult pretrain_agents(const RunConfig& config, QGenPolicy& qgen, GuesserNet& guesser);

// pretrain_agents plus the on-disk artifacts: vocab.txt, losses.csv, and the
// pretrain checkpoint (epochs_completed = 0, empty statistics).
PretrainResult cmd_pretrain(const RunConfig& config);

struct TrainResult {
  std::vector<EpochMetrics> metrics;  // epochs run by this invocation only
  int epochs_completed = 0;           // total, including the checkpoint's
};

// Loads `checkpoint_path`, resumes at its epoch counter, runs until
// config.trainer.epochs epochs exist in total, appending one metrics row and
// rewriting the train checkpoint after every epoch. `progress`, when given,
// receives one metrics row per epoch.
TrainResult cmd_train(const RunConfig& config, const std::string& checkpoint_path,
                      std::ostream* progress = nullptr);

struct EvalResult {
  int episodes = 0;
  double success_rate = 0.0;
  double mean_dialogue_len = 0.0;
};

// Greedy rollouts on freshly seeded evaluation worlds; temperature and the
// sampler are never consulted. One JSON line per episode goes to
// `episode_log` when given.
EvalResult evaluate_greedy(QGenPolicy& qgen, GuesserNet& guesser, const WorldConfig& world_config,
                           const TrainerConfig& config, int episodes,
                           std::ostream* episode_log = nullptr);

// Loads `checkpoint_path` and evaluates config.eval_episodes greedy episodes,
// writing episodes.jsonl fresh.
EvalResult cmd_evaluate(const RunConfig& config, const std::string& checkpoint_path);

// Runs every audit check, printing one [PASS]/[FAIL] line each; returns the
// number of failed checks.
int cmd_audit(const AuditOptions& options, std::ostream& out);

}  // namespace tpg
