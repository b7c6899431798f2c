#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tpg/game.hpp"
#include "tpg/param_store.hpp"
#include "tpg/rng.hpp"
#include "tpg/tape.hpp"
#include "tpg/vocab.hpp"

namespace tpg {

struct ModelConfig {
  int embed_dim = 16;
  int hidden_dim = 32;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Single-gate recurrent unit used by the history encoder, the word decoder,
// and the guesser's fact encoder:
//   z  = sigmoid(Wz [x;h] + bz)
//   c  = tanh(Wc [x;h] + bc)
//   h' = z*c + (1-z)*h
struct RecurrentCell {
  BlockId gate_w = -1;
  BlockId gate_b = -1;
  BlockId cand_w = -1;
  BlockId cand_b = -1;

  static RecurrentCell create(ParamStore& store, const std::string& prefix, int input_dim,
                              int hidden_dim);
  NodeId step(Tape& tape, const ParamStore& store, NodeId x, NodeId h) const;
  void bias_toward_memory(ParamStore& store) const;
};

// Question generator: a recurrent history encoder conditioned on a summary
// embedding of the whole object list, and a word decoder whose initial state
// is the current encoder state. Encoder and decoder read the same token
// embedding table.
class QGenPolicy {
 public:
  static constexpr int kMaxTurns = 8;

  QGenPolicy(const Vocab& vocab, const ModelConfig& config, SeededRng& init_rng);

  const Vocab& vocab() const { return *vocab_; }
  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  // Sum of per-object attribute embeddings over the canonical object order,
  // so equal object multisets give bit-equal summaries.
  NodeId world_summary(Tape& tape, const GameWorld& world) const;
  // Encoder state after consuming only the <start> token and the summary.
  NodeId initial_encoder_state(Tape& tape, NodeId world_sum) const;
  NodeId encoder_consume(Tape& tape, NodeId state, int token, NodeId world_sum) const;

  struct DecodeOut {
    NodeId pmf;
    NodeId state;
  };
  DecodeOut decode_step(Tape& tape, NodeId state, int prev_token) const;

  // Value-level views for callers that do not hold a tape.
  std::vector<double> encode_history(const GameWorld& world,
                                     std::span<const DialogueTurn> dialogue) const;
  std::pair<std::vector<double>, std::vector<double>> qgen_step(std::span<const double> state,
                                                                int prev_token) const;

 private:
  const Vocab* vocab_;
  ModelConfig config_;
  ParamStore store_;
  BlockId embed_ = -1;
  BlockId cat_ = -1;
  BlockId col_ = -1;
  BlockId row_ = -1;
  RecurrentCell enc_;
  RecurrentCell dec_;
  BlockId out_w_ = -1;
  BlockId out_b_ = -1;
};

// Object guesser: encodes each completed QA pair into a fact vector, attends
// over the facts twice (first key: the summed object embeddings; second
// key: a learned map of [attended ; key1]), then scores every object by dot
// product with the final attended summary.
class GuesserNet {
 public:
  GuesserNet(const Vocab& vocab, const ModelConfig& config, SeededRng& init_rng);

  const Vocab& vocab() const { return *vocab_; }
  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  // pmf over world.objects; empty dialogue attends over nothing and falls
  // back to the uniform distribution.
  NodeId forward(Tape& tape, const GameWorld& world,
                 std::span<const DialogueTurn> dialogue) const;
  std::vector<double> guesser_forward(const GameWorld& world,
                                      std::span<const DialogueTurn> dialogue) const;

 private:
  NodeId object_embedding(Tape& tape, const GameObject& object) const;
  // softmax(fact . key) weighted sum of facts; the zero vector when no facts.
  NodeId attend(Tape& tape, std::span<const NodeId> facts, NodeId key) const;

  const Vocab* vocab_;
  ModelConfig config_;
  ParamStore store_;
  BlockId embed_ = -1;
  BlockId cat_ = -1;
  BlockId col_ = -1;
  BlockId row_ = -1;
  RecurrentCell fact_;
  BlockId key2_w_ = -1;
  BlockId key2_b_ = -1;
};

// One behavior-cloning sample: a world plus the expert's completed dialogue
// (the guess label is world.target).
struct ExpertEpisode {
  GameWorld world;
  std::vector<DialogueTurn> turns;
};

// Teacher-forced mean negative log-likelihood over every expert token (each
// question's words and terminator, plus the closing <eod>), gradients
// accumulated and one ascent step applied. Returns the pre-step loss.
double qgen_pretrain_nll_step(QGenPolicy& policy, std::span<const ExpertEpisode> batch,
                              double learning_rate);
// Same for the guesser on the target labels.
double guesser_pretrain_nll_step(GuesserNet& net, std::span<const ExpertEpisode> batch,
                                 double learning_rate);

// Object indices sorted by (category, col, row); ties keep list order. Equal
// multisets of objects yield the same value sequence, which is what the
// bit-exact summary contracts rely on.
std::vector<int> canonical_object_order(const GameWorld& world);

}  // namespace tpg
