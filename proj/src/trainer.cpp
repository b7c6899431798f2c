#include "tpg/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"
#include "tpg/tempered.hpp"

namespace tpg {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Reinforce: return "reinforce";
    case Variant::SingleTpg: return "single_tpg";
    case Variant::ParallelTpg: return "parallel_tpg";
    case Variant::DynamicTpg: return "dynamic_tpg";
  }
  throw std::logic_error("unknown Variant");
}

Variant variant_from_string(const std::string& name) {
  if (name == "reinforce") return Variant::Reinforce;
  if (name == "single_tpg") return Variant::SingleTpg;
  if (name == "parallel_tpg") return Variant::ParallelTpg;
  if (name == "dynamic_tpg") return Variant::DynamicTpg;
  throw std::invalid_argument("unknown variant: " + name);
}

void TrainerConfig::validate() const {
  if (!(tau_global > 0.0) || !std::isfinite(tau_global)) {
    throw std::invalid_argument("tau_global must be finite and positive");
  }
  if (parallel_temperatures.empty()) {
    throw std::invalid_argument("parallel variant needs at least one temperature");
  }
  for (double t : parallel_temperatures) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("parallel temperatures must be finite and positive");
    }
  }
  bounds.validate();
  if (!(qgen_lr > 0.0) || !(guesser_lr > 0.0)) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (max_questions < 1) throw std::invalid_argument("max_questions must be >= 1");
  if (max_words < 1) throw std::invalid_argument("max_words must be >= 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (worlds_per_epoch < 1) throw std::invalid_argument("worlds_per_epoch must be >= 1");
}

double baseline_update(BaselineTracker& tracker, double reward) {
  tracker.episodes += 1;
  tracker.reward_sum += reward;
  return tracker.baseline();
}

std::vector<int> QuestionRecord::tokens() const {
  std::vector<int> out;
  out.reserve(events.size());
  for (const TokenEvent& e : events) out.push_back(e.token);
  return out;
}

int EpisodeRecord::sampled_action_count() const {
  int n = 0;
  for (const QuestionRecord& q : questions) {
    for (const TokenEvent& e : q.events) n += e.forced ? 0 : 1;
  }
  for (const TokenEvent& e : trailing) n += e.forced ? 0 : 1;
  return n;
}

double EpisodeRecord::mean_temperature() const {
  double sum = 0.0;
  int n = 0;
  auto take = [&](const TokenEvent& e) {
    if (!e.forced) {
      sum += e.temperature;
      ++n;
    }
  };
  for (const QuestionRecord& q : questions) {
    for (const TokenEvent& e : q.events) take(e);
  }
  for (const TokenEvent& e : trailing) take(e);
  return n == 0 ? 1.0 : sum / n;
}

std::vector<DialogueTurn> EpisodeRecord::turns() const {
  std::vector<DialogueTurn> out;
  out.reserve(questions.size());
  for (const QuestionRecord& q : questions) out.push_back({q.tokens(), q.answer});
  return out;
}

std::vector<int> EpisodeRecord::sampled_tokens() const {
  std::vector<int> out;
  for (const QuestionRecord& q : questions) {
    for (const TokenEvent& e : q.events) {
      if (!e.forced) out.push_back(e.token);
    }
  }
  for (const TokenEvent& e : trailing) {
    if (!e.forced) out.push_back(e.token);
  }
  return out;
}

namespace {

double step_temperature(const TrainerConfig& config, const FrequencyStats& stats,
                        std::span<const double> pmf, bool has_override, double override_tau) {
  if (has_override) return override_tau;
  switch (config.variant) {
    case Variant::Reinforce: return 1.0;
    case Variant::SingleTpg: return config.tau_global;
    case Variant::ParallelTpg:
      throw std::invalid_argument("parallel rollouts need an explicit per-rollout temperature");
    case Variant::DynamicTpg: {
      // The heuristic reads the *untempered* argmax word's usage statistic.
      const int preferred = greedy_index(pmf);
      return dynamic_temperature(stats.tfidf(preferred, config.tfidf_strategy), config.bounds);
    }
  }
  throw std::logic_error("unknown Variant");
}

}  // namespace

RolloutTrace rollout_episode_on_tapes(Tape& qgen_tape, Tape& guesser_tape, QGenPolicy& qgen,
                                      GuesserNet& guesser, const GameWorld& world,
                                      const TrainerConfig& config, const FrequencyStats& stats,
                                      SeededRng& rng, RolloutMode mode,
                                      std::optional<double> temperature_override) {
  const Vocab& vocab = qgen.vocab();
  const bool has_override = temperature_override.has_value();
  const double override_tau = temperature_override.value_or(1.0);
  RolloutTrace trace;
  trace.record.world = world;
  trace.record.greedy = mode == RolloutMode::Greedy;

  std::vector<NodeId> logprobs;
  const NodeId ws = qgen.world_summary(qgen_tape, world);
  NodeId enc = qgen.initial_encoder_state(qgen_tape, ws);

  bool saw_eod = false;
  while (!saw_eod && static_cast<int>(trace.record.questions.size()) < config.max_questions) {
    NodeId dec = enc;
    int prev = vocab.start();
    std::vector<TokenEvent> events;
    bool completed = false;
    while (true) {
      if (static_cast<int>(events.size()) == config.max_words - 1) {
        // Out of room for anything but the terminator; emit it unsampled.
        events.push_back({vocab.end_question(), 1.0, true});
        completed = true;
        break;
      }
      const QGenPolicy::DecodeOut out = qgen.decode_step(qgen_tape, dec, prev);
      dec = out.state;
      const std::span<const double> pmf = qgen_tape.value(out.pmf);
      int token;
      double tau = 1.0;
      if (mode == RolloutMode::Greedy) {
        token = greedy_index(pmf);
      } else {
        tau = step_temperature(config, stats, pmf, has_override, override_tau);
        token = tau == 1.0 ? sample_index(pmf, rng.uniform01())
                           : sample_index(temper(pmf, tau), rng.uniform01());
      }
      logprobs.push_back(qgen_tape.log_select(out.pmf, token));
      events.push_back({token, tau, false});
      if (token == vocab.end_dialogue()) {
        saw_eod = true;
        break;
      }
      if (token == vocab.end_question()) {
        completed = true;
        break;
      }
      prev = token;
    }

    if (completed) {
      QuestionRecord q;
      q.events = std::move(events);
      const std::vector<int> tokens = q.tokens();
      q.answer = oracle_answer(world, tokens, vocab);
      for (int t : tokens) enc = qgen.encoder_consume(qgen_tape, enc, t, ws);
      enc = qgen.encoder_consume(qgen_tape, enc, answer_token(q.answer, vocab), ws);
      trace.record.questions.push_back(std::move(q));
    } else {
      trace.record.trailing = std::move(events);
    }
  }

  const std::vector<DialogueTurn> turns = trace.record.turns();
  const NodeId gpmf = guesser.forward(guesser_tape, world, turns);
  const std::span<const double> gp = guesser_tape.value(gpmf);
  trace.record.guess =
      mode == RolloutMode::Greedy ? greedy_index(gp) : sample_index(gp, rng.uniform01());
  trace.guesser_logprob = guesser_tape.log_select(gpmf, trace.record.guess);
  trace.record.reward = guess_reward(world, trace.record.guess);
  if (!logprobs.empty()) trace.qgen_logprob_sum = qgen_tape.sum_scalars(logprobs);
  return trace;
}

EpisodeRecord rollout_episode(QGenPolicy& qgen, GuesserNet& guesser, const GameWorld& world,
                              const TrainerConfig& config, const FrequencyStats& stats,
                              SeededRng& rng, RolloutMode mode) {
  Tape qgen_tape;
  Tape guesser_tape;
  return rollout_episode_on_tapes(qgen_tape, guesser_tape, qgen, guesser, world, config, stats,
                                  rng, mode)
      .record;
}

RolloutTrace replay_episode_on_tapes(Tape& qgen_tape, Tape& guesser_tape, QGenPolicy& qgen,
                                     GuesserNet& guesser, const EpisodeRecord& record) {
  const Vocab& vocab = qgen.vocab();
  RolloutTrace trace;
  trace.record = record;

  std::vector<NodeId> logprobs;
  const NodeId ws = qgen.world_summary(qgen_tape, record.world);
  NodeId enc = qgen.initial_encoder_state(qgen_tape, ws);

  auto replay_segment = [&](const std::vector<TokenEvent>& events) {
    NodeId dec = enc;
    int prev = vocab.start();
    for (const TokenEvent& e : events) {
      if (!e.forced) {
        const QGenPolicy::DecodeOut out = qgen.decode_step(qgen_tape, dec, prev);
        dec = out.state;
        logprobs.push_back(qgen_tape.log_select(out.pmf, e.token));
      }
      prev = e.token;
    }
  };

  for (const QuestionRecord& q : record.questions) {
    replay_segment(q.events);
    for (const TokenEvent& e : q.events) enc = qgen.encoder_consume(qgen_tape, enc, e.token, ws);
    enc = qgen.encoder_consume(qgen_tape, enc, answer_token(q.answer, vocab), ws);
  }
  replay_segment(record.trailing);

  const NodeId gpmf = guesser.forward(guesser_tape, record.world, record.turns());
  trace.guesser_logprob = guesser_tape.log_select(gpmf, record.guess);
  if (!logprobs.empty()) trace.qgen_logprob_sum = qgen_tape.sum_scalars(logprobs);
  return trace;
}

void accumulate_episode_gradients(Tape& qgen_tape, Tape& guesser_tape, QGenPolicy& qgen,
                                  GuesserNet& guesser, const RolloutTrace& trace, double baseline,
                                  const TrainerConfig& config) {
  const double r = trace.record.reward;
  if (r != 0.0 && r != 1.0) throw std::invalid_argument("episode reward outside {0, 1}");
  double advantage = r - baseline;
  if (config.divide_advantage_by_length) {
    advantage /= static_cast<double>(std::max(1, trace.record.sampled_action_count()));
  }
  if (trace.qgen_logprob_sum >= 0 && advantage != 0.0) {
    qgen_tape.backward(qgen.params(), trace.qgen_logprob_sum, advantage);
  }
  if (trace.guesser_logprob >= 0 && r != 0.0) {
    guesser_tape.backward(guesser.params(), trace.guesser_logprob, r);
  }
}

void reinforce_update(const EpisodeRecord& episode, BaselineTracker& tracker, QGenPolicy& qgen,
                      GuesserNet& guesser, const TrainerConfig& config) {
  const double b = tracker.baseline();
  Tape qgen_tape;
  Tape guesser_tape;
  qgen.params().zero_grads();
  guesser.params().zero_grads();
  const RolloutTrace trace = replay_episode_on_tapes(qgen_tape, guesser_tape, qgen, guesser,
                                                     episode);
  accumulate_episode_gradients(qgen_tape, guesser_tape, qgen, guesser, trace, b, config);
  baseline_update(tracker, episode.reward);
  qgen.params().sgd_step(config.qgen_lr);
  guesser.params().sgd_step(config.guesser_lr);
}

void parallel_update(std::span<const EpisodeRecord> episodes, BaselineTracker& tracker,
                     QGenPolicy& qgen, GuesserNet& guesser, const TrainerConfig& config) {
  if (episodes.size() != config.parallel_temperatures.size()) {
    throw std::invalid_argument("one episode per configured temperature required");
  }
  const double b = tracker.baseline();
  double mean_reward = 0.0;
  for (const EpisodeRecord& e : episodes) mean_reward += e.reward;
  mean_reward /= static_cast<double>(episodes.size());

  qgen.params().zero_grads();
  guesser.params().zero_grads();
  Tape qgen_tape;
  Tape guesser_tape;
  for (const EpisodeRecord& e : episodes) {
    qgen_tape.reset();
    guesser_tape.reset();
    RolloutTrace trace = replay_episode_on_tapes(qgen_tape, guesser_tape, qgen, guesser, e);
    if (config.parallel_shared_reward) {
      // Shared-score reading: every rollout's eligibility scaled by the mean
      // reward; the guesser still learns from its own outcome.
      if (trace.qgen_logprob_sum >= 0 && mean_reward != b) {
        double advantage = mean_reward - b;
        if (config.divide_advantage_by_length) {
          advantage /= static_cast<double>(std::max(1, e.sampled_action_count()));
        }
        qgen_tape.backward(qgen.params(), trace.qgen_logprob_sum, advantage);
      }
      if (trace.guesser_logprob >= 0 && e.reward != 0.0) {
        guesser_tape.backward(guesser.params(), trace.guesser_logprob, e.reward);
      }
    } else {
      accumulate_episode_gradients(qgen_tape, guesser_tape, qgen, guesser, trace, b, config);
    }
  }
  for (const EpisodeRecord& e : episodes) baseline_update(tracker, e.reward);
  qgen.params().sgd_step(config.qgen_lr);
  guesser.params().sgd_step(config.guesser_lr);
}

EpochMetrics train_epoch(int epoch_index, QGenPolicy& qgen, GuesserNet& guesser,
                         const WorldConfig& world_config, const TrainerConfig& config,
                         FrequencyStats& stats, BaselineTracker& tracker) {
  world_config.validate();
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const bool parallel = config.variant == Variant::ParallelTpg;
  const size_t rollouts_per_world = parallel ? config.parallel_temperatures.size() : 1;

  std::vector<Tape> qgen_tapes(rollouts_per_world);
  std::vector<Tape> guesser_tapes(rollouts_per_world);
  std::vector<RolloutTrace> traces(rollouts_per_world);

  double reward_sum = 0.0;
  double len_sum = 0.0;
  double temp_sum = 0.0;
  long long temp_count = 0;
  long long episode_count = 0;
  int worlds_since_step = 0;

  for (int i = 0; i < config.worlds_per_epoch; ++i) {
    const GameWorld world =
        new_game(world_config, derive_seed(config.master_seed, "world", epoch_index, i));
    const double b = tracker.baseline();

    double world_mean_reward = 0.0;
    for (size_t k = 0; k < rollouts_per_world; ++k) {
      const std::uint64_t sample_seed =
          derive_seed(config.master_seed, "sample", static_cast<std::uint64_t>(epoch_index),
                      static_cast<std::uint64_t>(i), k);
      SeededRng rng(sample_seed);
      qgen_tapes[k].reset();
      guesser_tapes[k].reset();
      const std::optional<double> override_tau =
          parallel ? std::optional<double>(config.parallel_temperatures[k]) : std::nullopt;
      traces[k] = rollout_episode_on_tapes(qgen_tapes[k], guesser_tapes[k], qgen, guesser, world,
                                           config, stats, rng, RolloutMode::Sample, override_tau);
      traces[k].record.sampling_seed = sample_seed;
      world_mean_reward += traces[k].record.reward;
    }
    world_mean_reward /= static_cast<double>(rollouts_per_world);

    // Rewards of all same-world rollouts are known here, so the shared-score
    // mode can use their mean; accumulation order stays the temperature
    // index order.
    for (size_t k = 0; k < rollouts_per_world; ++k) {
      const EpisodeRecord& rec = traces[k].record;
      if (parallel && config.parallel_shared_reward) {
        if (traces[k].qgen_logprob_sum >= 0 && world_mean_reward != b) {
          double advantage = world_mean_reward - b;
          if (config.divide_advantage_by_length) {
            advantage /= static_cast<double>(std::max(1, rec.sampled_action_count()));
          }
          qgen_tapes[k].backward(qgen.params(), traces[k].qgen_logprob_sum, advantage);
        }
        if (traces[k].guesser_logprob >= 0 && rec.reward != 0.0) {
          guesser_tapes[k].backward(guesser.params(), traces[k].guesser_logprob, rec.reward);
        }
      } else {
        accumulate_episode_gradients(qgen_tapes[k], guesser_tapes[k], qgen, guesser, traces[k], b,
                                     config);
      }
    }

    for (size_t k = 0; k < rollouts_per_world; ++k) {
      const EpisodeRecord& rec = traces[k].record;
      baseline_update(tracker, rec.reward);
      stats.record_dialogue(rec.sampled_tokens());
      reward_sum += rec.reward;
      len_sum += rec.dialogue_length();
      for (const QuestionRecord& q : rec.questions) {
        for (const TokenEvent& e : q.events) {
          if (!e.forced) {
            temp_sum += e.temperature;
            ++temp_count;
          }
        }
      }
      for (const TokenEvent& e : rec.trailing) {
        if (!e.forced) {
          temp_sum += e.temperature;
          ++temp_count;
        }
      }
      ++episode_count;
    }

    if (++worlds_since_step == config.batch_size || i == config.worlds_per_epoch - 1) {
      qgen.params().sgd_step(config.qgen_lr);
      guesser.params().sgd_step(config.guesser_lr);
      worlds_since_step = 0;
    }
  }

  EpochMetrics m;
  m.epoch = epoch_index;
  m.variant = config.variant;
  m.success_rate = reward_sum / static_cast<double>(episode_count);
  m.mean_dialogue_len = len_sum / static_cast<double>(episode_count);
  m.mean_temperature = temp_count == 0 ? 1.0 : temp_sum / static_cast<double>(temp_count);
  m.baseline = tracker.baseline();
  m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
  return m;
}

void append_metrics_row(std::ostream& out, const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%s,%.6f,%.6f,%.6f,%.6f,%lld", m.epoch, to_string(m.variant),
                m.success_rate, m.mean_dialogue_len, m.mean_temperature, m.baseline,
                static_cast<long long>(std::llround(m.wall_ms)));
  out << buf << '\n';
}

std::string to_json_line(const EpisodeRecord& record, const Vocab& vocab) {
  nlohmann::json j;
  j["world_seed"] = record.world.seed;
  j["sampling_seed"] = record.sampling_seed;
  j["greedy"] = record.greedy;
  nlohmann::json objs = nlohmann::json::array();
  for (const GameObject& o : record.world.objects) {
    objs.push_back({o.category, o.col, o.row});
  }
  j["objects"] = std::move(objs);
  j["target"] = record.world.target;

  auto events_json = [](const std::vector<TokenEvent>& events) {
    nlohmann::json q;
    nlohmann::json tokens = nlohmann::json::array();
    nlohmann::json temps = nlohmann::json::array();
    nlohmann::json forced = nlohmann::json::array();
    for (const TokenEvent& e : events) {
      tokens.push_back(e.token);
      temps.push_back(e.temperature);
      forced.push_back(e.forced);
    }
    q["tokens"] = std::move(tokens);
    q["temperatures"] = std::move(temps);
    q["forced"] = std::move(forced);
    return q;
  };

  auto words_of = [&vocab](const std::vector<TokenEvent>& events) {
    std::string text;
    for (const TokenEvent& e : events) {
      if (!text.empty()) text += ' ';
      text += vocab.word(e.token);
    }
    return text;
  };

  nlohmann::json questions = nlohmann::json::array();
  for (const QuestionRecord& q : record.questions) {
    nlohmann::json jq = events_json(q.events);
    jq["words"] = words_of(q.events);
    jq["answer"] = to_string(q.answer);
    questions.push_back(std::move(jq));
  }
  j["questions"] = std::move(questions);
  if (!record.trailing.empty()) {
    j["trailing"] = events_json(record.trailing);
    j["trailing"]["words"] = words_of(record.trailing);
  }
  j["guess"] = record.guess;
  j["reward"] = record.reward;
  return j.dump();
}

}  // namespace tpg
