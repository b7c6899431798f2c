#include "tpg/agents.hpp"

#include <algorithm>
#include <stdexcept>

namespace tpg {

void ModelConfig::validate() const {
  if (embed_dim < 1 || embed_dim > 1024) throw std::invalid_argument("embed_dim outside 1..1024");
  if (hidden_dim < 1 || hidden_dim > 1024) {
    throw std::invalid_argument("hidden_dim outside 1..1024");
  }
}

RecurrentCell RecurrentCell::create(ParamStore& store, const std::string& prefix, int input_dim,
                                    int hidden_dim) {
  RecurrentCell cell;
  cell.gate_w = store.add(prefix + ".gate_w", hidden_dim, input_dim + hidden_dim);
  cell.gate_b = store.add_vector(prefix + ".gate_b", hidden_dim);
  cell.cand_w = store.add(prefix + ".cand_w", hidden_dim, input_dim + hidden_dim);
  cell.cand_b = store.add_vector(prefix + ".cand_b", hidden_dim);
  return cell;
}

void RecurrentCell::bias_toward_memory(ParamStore& store) const {
  // A zero-centered gate overwrites half the state every token, so anything
  // observed a few tokens ago is effectively erased. Starting the gate low
  // keeps state across a whole question-answer turn until training decides
  // otherwise.
  for (double& v : store.block(gate_b).value) v -= 1.5;
}

NodeId RecurrentCell::step(Tape& tape, const ParamStore& store, NodeId x, NodeId h) const {
  const NodeId xh = tape.concat(x, h);
  const NodeId z = tape.sigmoid_of(tape.affine(store, gate_w, gate_b, xh));
  const NodeId c = tape.tanh_of(tape.affine(store, cand_w, cand_b, xh));
  return tape.gate_blend(z, c, h);
}

std::vector<int> canonical_object_order(const GameWorld& world) {
  std::vector<int> order(world.objects.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const GameObject& oa = world.objects[static_cast<size_t>(a)];
    const GameObject& ob = world.objects[static_cast<size_t>(b)];
    if (oa.category != ob.category) return oa.category < ob.category;
    if (oa.col != ob.col) return oa.col < ob.col;
    return oa.row < ob.row;
  });
  return order;
}

// ---- question generator ----

QGenPolicy::QGenPolicy(const Vocab& vocab, const ModelConfig& config, SeededRng& init_rng)
    : vocab_(&vocab), config_(config) {
  config_.validate();
  const int d = config_.embed_dim;
  const int h = config_.hidden_dim;
  embed_ = store_.add("embed", vocab.size(), d);
  cat_ = store_.add("cat", vocab.num_categories(), d);
  col_ = store_.add("col", 3, d);
  row_ = store_.add("row", 3, d);
  // Encoder input is [token embedding ; world summary], decoder input is the
  // previous token's embedding alone.
  enc_ = RecurrentCell::create(store_, "enc", 2 * d, h);
  dec_ = RecurrentCell::create(store_, "dec", d, h);
  out_w_ = store_.add("out_w", vocab.size(), h);
  out_b_ = store_.add_vector("out_b", vocab.size());
  store_.init_uniform(init_rng);
  enc_.bias_toward_memory(store_);
  dec_.bias_toward_memory(store_);
}

NodeId QGenPolicy::world_summary(Tape& tape, const GameWorld& world) const {
  const std::vector<int> order = canonical_object_order(world);
  NodeId sum = -1;
  for (int k : order) {
    const GameObject& o = world.objects[static_cast<size_t>(k)];
    NodeId emb = tape.add(tape.param_row(store_, cat_, o.category),
                          tape.param_row(store_, col_, o.col));
    emb = tape.add(emb, tape.param_row(store_, row_, o.row));
    sum = (sum < 0) ? emb : tape.add(sum, emb);
  }
  return sum;
}

NodeId QGenPolicy::initial_encoder_state(Tape& tape, NodeId world_sum) const {
  const std::vector<double> zeros(static_cast<size_t>(config_.hidden_dim), 0.0);
  const NodeId h0 = tape.input(zeros);
  return encoder_consume(tape, h0, vocab_->start(), world_sum);
}

NodeId QGenPolicy::encoder_consume(Tape& tape, NodeId state, int token, NodeId world_sum) const {
  const NodeId x = tape.concat(tape.param_row(store_, embed_, token), world_sum);
  return enc_.step(tape, store_, x, state);
}

QGenPolicy::DecodeOut QGenPolicy::decode_step(Tape& tape, NodeId state, int prev_token) const {
  const NodeId x = tape.param_row(store_, embed_, prev_token);
  const NodeId next = dec_.step(tape, store_, x, state);
  const NodeId pmf = tape.softmax_of(tape.affine(store_, out_w_, out_b_, next));
  return {pmf, next};
}

std::vector<double> QGenPolicy::encode_history(const GameWorld& world,
                                               std::span<const DialogueTurn> dialogue) const {
  if (static_cast<int>(dialogue.size()) > kMaxTurns) {
    throw std::invalid_argument("dialogue longer than the question cap");
  }
  Tape tape;
  const NodeId ws = world_summary(tape, world);
  NodeId state = initial_encoder_state(tape, ws);
  for (const DialogueTurn& turn : dialogue) {
    for (int token : turn.question) state = encoder_consume(tape, state, token, ws);
    state = encoder_consume(tape, state, answer_token(turn.answer, *vocab_), ws);
  }
  const std::span<const double> v = tape.value(state);
  return {v.begin(), v.end()};
}

std::pair<std::vector<double>, std::vector<double>> QGenPolicy::qgen_step(
    std::span<const double> state, int prev_token) const {
  if (static_cast<int>(state.size()) != config_.hidden_dim) {
    throw std::invalid_argument("decoder state has wrong dimension");
  }
  Tape tape;
  const DecodeOut out = decode_step(tape, tape.input(state), prev_token);
  const std::span<const double> pmf = tape.value(out.pmf);
  const std::span<const double> next = tape.value(out.state);
  return {{pmf.begin(), pmf.end()}, {next.begin(), next.end()}};
}

// ---- guesser ----

GuesserNet::GuesserNet(const Vocab& vocab, const ModelConfig& config, SeededRng& init_rng)
    : vocab_(&vocab), config_(config) {
  config_.validate();
  const int d = config_.embed_dim;
  const int h = config_.hidden_dim;
  embed_ = store_.add("embed", vocab.size(), d);
  cat_ = store_.add("cat", vocab.num_categories(), h);
  col_ = store_.add("col", 3, h);
  row_ = store_.add("row", 3, h);
  fact_ = RecurrentCell::create(store_, "fact", d, h);
  key2_w_ = store_.add("key2_w", h, 2 * h);
  key2_b_ = store_.add_vector("key2_b", h);
  store_.init_uniform(init_rng);
  // Scores are dot products of two learned factors; both starting near zero
  // stalls the first epochs of cloning. The lookup tables start wider, the
  // cells stay small.
  for (const BlockId id : {embed_, cat_, col_, row_}) {
    for (double& v : store_.block(id).value) v *= 4.0;
  }
}

NodeId GuesserNet::object_embedding(Tape& tape, const GameObject& object) const {
  NodeId emb = tape.add(tape.param_row(store_, cat_, object.category),
                        tape.param_row(store_, col_, object.col));
  return tape.add(emb, tape.param_row(store_, row_, object.row));
}

NodeId GuesserNet::attend(Tape& tape, std::span<const NodeId> facts, NodeId key) const {
  if (facts.empty()) {
    const std::vector<double> zeros(static_cast<size_t>(config_.hidden_dim), 0.0);
    return tape.input(zeros);
  }
  std::vector<NodeId> scores;
  scores.reserve(facts.size());
  for (NodeId f : facts) scores.push_back(tape.dot(f, key));
  const NodeId weights = tape.softmax_of(tape.stack_scalars(scores));
  return tape.weighted_sum(weights, facts, config_.hidden_dim);
}

NodeId GuesserNet::forward(Tape& tape, const GameWorld& world,
                           std::span<const DialogueTurn> dialogue) const {
  const std::vector<double> zeros(static_cast<size_t>(config_.hidden_dim), 0.0);

  std::vector<NodeId> facts;
  facts.reserve(dialogue.size());
  for (const DialogueTurn& turn : dialogue) {
    NodeId h = tape.input(zeros);
    for (int token : turn.question) {
      h = fact_.step(tape, store_, tape.param_row(store_, embed_, token), h);
    }
    h = fact_.step(tape, store_,
                   tape.param_row(store_, embed_, answer_token(turn.answer, *vocab_)), h);
    facts.push_back(h);
  }

  std::vector<NodeId> object_embs;
  object_embs.reserve(world.objects.size());
  for (const GameObject& o : world.objects) object_embs.push_back(object_embedding(tape, o));

  // key1 sums the same embedding nodes in canonical order; duplicates are
  // bit-equal addends so any permutation of the object list lands on the
  // identical sum.
  const std::vector<int> order = canonical_object_order(world);
  NodeId key1 = -1;
  for (int k : order) {
    key1 = (key1 < 0) ? object_embs[static_cast<size_t>(k)]
                      : tape.add(key1, object_embs[static_cast<size_t>(k)]);
  }

  const NodeId attended1 = attend(tape, facts, key1);
  const NodeId key2 =
      tape.tanh_of(tape.affine(store_, key2_w_, key2_b_, tape.concat(attended1, key1)));
  const NodeId attended2 = attend(tape, facts, key2);

  std::vector<NodeId> scores;
  scores.reserve(world.objects.size());
  for (NodeId emb : object_embs) scores.push_back(tape.dot(attended2, emb));
  return tape.softmax_of(tape.stack_scalars(scores));
}

std::vector<double> GuesserNet::guesser_forward(const GameWorld& world,
                                                std::span<const DialogueTurn> dialogue) const {
  Tape tape;
  const NodeId pmf = forward(tape, world, dialogue);
  const std::span<const double> v = tape.value(pmf);
  return {v.begin(), v.end()};
}

// ---- behavior-cloning steps ----

double qgen_pretrain_nll_step(QGenPolicy& policy, std::span<const ExpertEpisode> batch,
                              double learning_rate) {
  if (batch.empty()) throw std::invalid_argument("empty pretraining batch");
  const Vocab& vocab = policy.vocab();

  long long total_tokens = 0;
  for (const ExpertEpisode& ep : batch) {
    for (const DialogueTurn& turn : ep.turns) {
      total_tokens += static_cast<long long>(turn.question.size());
    }
    total_tokens += 1;  // closing <eod>
  }

  double loss = 0.0;
  Tape tape;
  for (const ExpertEpisode& ep : batch) {
    tape.reset();
    const NodeId ws = policy.world_summary(tape, ep.world);
    NodeId enc = policy.initial_encoder_state(tape, ws);
    std::vector<NodeId> logprobs;

    for (const DialogueTurn& turn : ep.turns) {
      NodeId dec = enc;
      int prev = vocab.start();
      for (int token : turn.question) {
        const QGenPolicy::DecodeOut out = policy.decode_step(tape, dec, prev);
        logprobs.push_back(tape.log_select(out.pmf, token));
        dec = out.state;
        prev = token;
      }
      for (int token : turn.question) enc = policy.encoder_consume(tape, enc, token, ws);
      enc = policy.encoder_consume(tape, enc, answer_token(turn.answer, vocab), ws);
    }
    const QGenPolicy::DecodeOut out = policy.decode_step(tape, enc, vocab.start());
    logprobs.push_back(tape.log_select(out.pmf, vocab.end_dialogue()));

    const NodeId episode_sum = tape.sum_scalars(logprobs);
    loss -= tape.scalar(episode_sum) / static_cast<double>(total_tokens);
    tape.backward(policy.params(), episode_sum, 1.0 / static_cast<double>(total_tokens));
  }
  policy.params().sgd_step(learning_rate);
  return loss;
}

double guesser_pretrain_nll_step(GuesserNet& net, std::span<const ExpertEpisode> batch,
                                 double learning_rate) {
  if (batch.empty()) throw std::invalid_argument("empty pretraining batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  Tape tape;
  for (const ExpertEpisode& ep : batch) {
    tape.reset();
    const NodeId pmf = net.forward(tape, ep.world, ep.turns);
    const NodeId lp = tape.log_select(pmf, ep.world.target);
    loss -= tape.scalar(lp) * inv;
    tape.backward(net.params(), lp, inv);
  }
  net.params().sgd_step(learning_rate);
  return loss;
}

}  // namespace tpg
