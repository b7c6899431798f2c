#include "tpg/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <system_error>
#include <utility>

#include "tpg/checkpoint.hpp"
#include "tpg/errors.hpp"
#include "tpg/rng.hpp"
#include "tpg/tempered.hpp"

namespace tpg {

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

std::optional<ExpertEpisode> expert_episode(const GameWorld& world, const Vocab& vocab) {
  ScriptedExpert expert(world, vocab);
  std::vector<DialogueTurn> turns;
  while (true) {
    const std::vector<int> question = expert.next_question();
    if (question.size() == 1 && question[0] == vocab.end_dialogue()) break;
    const Answer answer = oracle_answer(world, question, vocab);
    expert.observe(question, answer);
    turns.push_back({question, answer});
  }
  if (consistency_guess(world, turns, vocab) != world.target) return std::nullopt;
  return ExpertEpisode{world, std::move(turns)};
}

PretrainResult pretrain_agents(const RunConfig& config, QGenPolicy& qgen, GuesserNet& guesser) {
  config.validate();
  const Vocab& vocab = qgen.vocab();
  const std::uint64_t master = config.trainer.master_seed;

  std::vector<ExpertEpisode> pool;
  pool.reserve(static_cast<size_t>(config.pretrain_episodes));
  // Unsolvable worlds are skipped, so drawing can take more attempts than the
  // budget; a hard cap turns a world distribution the expert cannot handle
  // into an error instead of a hang.
  const long long max_attempts = 128 + 32LL * config.pretrain_episodes;
  for (long long attempt = 0; static_cast<int>(pool.size()) < config.pretrain_episodes;
       ++attempt) {
    if (attempt >= max_attempts) {
      throw ConfigError("expert pool assembly exceeded " + std::to_string(max_attempts) +
                        " attempts; world configuration appears unsolvable");
    }
    const GameWorld world =
        new_game(config.world, derive_seed(master, "pretrain_world", static_cast<std::uint64_t>(attempt)));
    if (std::optional<ExpertEpisode> episode = expert_episode(world, vocab)) {
      pool.push_back(std::move(*episode));
    }
  }

  PretrainResult result;
  result.pool_size = static_cast<int>(pool.size());
  const int batch = config.trainer.batch_size;
  int step = 0;
  for (int pass = 0; pass < config.pretrain_passes; ++pass) {
    // Step size anneals across passes: early passes shape the policy, late
    // passes settle it instead of cycling around the optimum.
    const double lr =
        config.pretrain_lr /
        (1.0 + 3.0 * static_cast<double>(pass) / std::max(1, config.pretrain_passes - 1));
    for (size_t begin = 0; begin < pool.size(); begin += static_cast<size_t>(batch)) {
      const size_t count = std::min(pool.size() - begin, static_cast<size_t>(batch));
      const std::span<const ExpertEpisode> slice(pool.data() + begin, count);
      PretrainStep row;
      row.step = step++;
      row.qgen_nll = qgen_pretrain_nll_step(qgen, slice, lr);
      row.guesser_nll = guesser_pretrain_nll_step(guesser, slice, lr);
      result.steps.push_back(row);
    }
  }
  return result;
}

namespace {

// Agents are always constructed from the same labeled init streams, so any
// checkpoint produced by this harness loads into them shape for shape.
struct AgentPair {
  Vocab vocab;
  QGenPolicy qgen;
  GuesserNet guesser;

  AgentPair(const RunConfig& config, SeededRng qgen_init, SeededRng guesser_init)
      : vocab(Vocab::build(config.world.num_categories)),
        qgen(vocab, config.model, qgen_init),
        guesser(vocab, config.model, guesser_init) {}
};

AgentPair make_agents(const RunConfig& config) {
  const std::uint64_t master = config.trainer.master_seed;
  return AgentPair(config, SeededRng(derive_seed(master, "qgen_init")),
                   SeededRng(derive_seed(master, "guesser_init")));
}

}  // namespace

PretrainResult cmd_pretrain(const RunConfig& config) {
  config.validate();
  ensure_output_dir(config.output_dir);
  const RunPaths paths{config.output_dir};

  AgentPair agents = make_agents(config);
  agents.vocab.write_file(paths.vocab_file());

  const PretrainResult result = pretrain_agents(config, agents.qgen, agents.guesser);

  std::ofstream losses(paths.losses_csv(), std::ios::trunc);
  if (!losses) throw IoError("cannot write " + paths.losses_csv());
  losses << "step,qgen_nll,guesser_nll\n";
  for (const PretrainStep& row : result.steps) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f", row.step, row.qgen_nll, row.guesser_nll);
    losses << buf << '\n';
  }
  if (!losses.flush()) throw IoError("cannot write " + paths.losses_csv());

  save_checkpoint(paths.pretrain_checkpoint(), agents.qgen, agents.guesser,
                  FrequencyStats(agents.vocab.size()), BaselineTracker{}, 0);
  return result;
}

TrainResult cmd_train(const RunConfig& config, const std::string& checkpoint_path,
                      std::ostream* progress) {
  config.validate();
  ensure_output_dir(config.output_dir);
  const RunPaths paths{config.output_dir};

  AgentPair agents = make_agents(config);
  CheckpointState state = load_checkpoint(checkpoint_path, agents.qgen, agents.guesser);
  if (state.epochs_completed > config.trainer.epochs) {
    throw ConfigError("checkpoint already holds " + std::to_string(state.epochs_completed) +
                      " epochs but the run wants " + std::to_string(config.trainer.epochs));
  }

  // A fresh run owns metrics.csv; a resumed one extends it.
  const bool fresh = state.epochs_completed == 0;
  std::ofstream metrics(paths.metrics_csv(), fresh ? std::ios::trunc : std::ios::app);
  if (!metrics) throw IoError("cannot write " + paths.metrics_csv());
  if (fresh) metrics << kMetricsHeader << '\n';

  TrainResult result;
  for (int epoch = state.epochs_completed; epoch < config.trainer.epochs; ++epoch) {
    const EpochMetrics m = train_epoch(epoch, agents.qgen, agents.guesser, config.world,
                                       config.trainer, state.stats, state.tracker);
    append_metrics_row(metrics, m);
    if (!metrics.flush()) throw IoError("cannot write " + paths.metrics_csv());
    if (progress != nullptr) {
      append_metrics_row(*progress, m);
      progress->flush();
    }
    save_checkpoint(paths.train_checkpoint(), agents.qgen, agents.guesser, state.stats,
                    state.tracker, epoch + 1);
    result.metrics.push_back(m);
  }
  result.epochs_completed = config.trainer.epochs;
  return result;
}

EvalResult evaluate_greedy(QGenPolicy& qgen, GuesserNet& guesser, const WorldConfig& world_config,
                           const TrainerConfig& config, int episodes,
                           std::ostream* episode_log) {
  if (episodes <= 0) throw ConfigError("evaluation needs a positive episode count");
  const FrequencyStats stats(qgen.vocab().size());
  EvalResult result;
  result.episodes = episodes;
  double reward_sum = 0.0;
  double length_sum = 0.0;
  for (int i = 0; i < episodes; ++i) {
    const GameWorld world = new_game(
        world_config, derive_seed(config.master_seed, "eval_world", static_cast<std::uint64_t>(i)));
    SeededRng unused(0);  // greedy mode draws nothing
    const EpisodeRecord record =
        rollout_episode(qgen, guesser, world, config, stats, unused, RolloutMode::Greedy);
    reward_sum += record.reward;
    length_sum += record.dialogue_length();
    if (episode_log != nullptr) *episode_log << to_json_line(record, qgen.vocab()) << '\n';
  }
  result.success_rate = reward_sum / episodes;
  result.mean_dialogue_len = length_sum / episodes;
  return result;
}

EvalResult cmd_evaluate(const RunConfig& config, const std::string& checkpoint_path) {
  config.validate();
  ensure_output_dir(config.output_dir);
  const RunPaths paths{config.output_dir};

  AgentPair agents = make_agents(config);
  load_checkpoint(checkpoint_path, agents.qgen, agents.guesser);

  std::ofstream log(paths.episodes_log(), std::ios::trunc);
  if (!log) throw IoError("cannot write " + paths.episodes_log());
  const EvalResult result = evaluate_greedy(agents.qgen, agents.guesser, config.world,
                                            config.trainer, config.eval_episodes, &log);
  if (!log.flush()) throw IoError("cannot write " + paths.episodes_log());
  return result;
}

int cmd_audit(const AuditOptions& options, std::ostream& out) {
  int failures = 0;
  for (const AuditCheck& check : run_audit(options)) {
    out << (check.passed ? "[PASS] " : "[FAIL] ") << check.name << ": " << check.detail << '\n';
    if (!check.passed) ++failures;
  }
  out.flush();
  return failures;
}

}  // namespace tpg
