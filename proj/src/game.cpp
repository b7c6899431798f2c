#include "tpg/game.hpp"

#include <algorithm>
#include <stdexcept>

#include "tpg/errors.hpp"

namespace tpg {

void WorldConfig::validate() const {
  if (num_objects < 2) throw ConfigError("world needs at least 2 objects");
  if (num_categories < 2) throw ConfigError("world needs at least 2 categories");
}

GameWorld new_game(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  SeededRng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    GameWorld world;
    world.seed = seed;
    world.objects.resize(static_cast<size_t>(config.num_objects));
    for (GameObject& o : world.objects) {
      o.category = rng.uniform_int(config.num_categories);
      o.col = rng.uniform_int(3);
      o.row = rng.uniform_int(3);
    }
    world.target = rng.uniform_int(config.num_objects);
    const GameObject& t = world.objects[static_cast<size_t>(world.target)];
    for (size_t k = 0; k < world.objects.size(); ++k) {
      if (static_cast<int>(k) != world.target && !(world.objects[k] == t)) return world;
    }
  }
  throw ConfigError("could not sample a world with a distinguishable target in 100 attempts");
}

GameWorld new_game(const WorldConfig& config, SeededRng& rng) {
  return new_game(config, rng.next_u64());
}

int answer_token(Answer a, const Vocab& vocab) {
  switch (a) {
    case Answer::Yes: return vocab.yes();
    case Answer::No: return vocab.no();
    case Answer::NotApplicable: return vocab.not_applicable();
  }
  throw std::logic_error("unknown Answer");
}

Answer answer_from_token(int token, const Vocab& vocab) {
  if (token == vocab.yes()) return Answer::Yes;
  if (token == vocab.no()) return Answer::No;
  if (token == vocab.not_applicable()) return Answer::NotApplicable;
  throw std::invalid_argument("token is not an answer token");
}

const char* to_string(Answer a) {
  switch (a) {
    case Answer::Yes: return "yes";
    case Answer::No: return "no";
    case Answer::NotApplicable: return "na";
  }
  throw std::logic_error("unknown Answer");
}

Answer answer_for(const GameObject& object, std::span<const int> question, const Vocab& vocab) {
  bool any_attribute = false;
  bool all_hold = true;
  for (int token : question) {
    if (vocab.is_category(token)) {
      any_attribute = true;
      all_hold = all_hold && object.category == vocab.category_of(token);
    } else if (vocab.is_column(token)) {
      any_attribute = true;
      all_hold = all_hold && object.col == vocab.column_of(token);
    } else if (vocab.is_row(token)) {
      any_attribute = true;
      all_hold = all_hold && object.row == vocab.row_of(token);
    }
  }
  if (!any_attribute) return Answer::NotApplicable;
  return all_hold ? Answer::Yes : Answer::No;
}

Answer oracle_answer(const GameWorld& world, std::span<const int> question, const Vocab& vocab) {
  return answer_for(world.objects[static_cast<size_t>(world.target)], question, vocab);
}

double guess_reward(const GameWorld& world, int guess) {
  if (guess < 0 || guess >= static_cast<int>(world.objects.size())) {
    throw std::out_of_range("guess outside object list");
  }
  return guess == world.target ? 1.0 : 0.0;
}

bool consistent_with(const GameObject& object, std::span<const DialogueTurn> dialogue,
                     const Vocab& vocab) {
  for (const DialogueTurn& turn : dialogue) {
    if (answer_for(object, turn.question, vocab) != turn.answer) return false;
  }
  return true;
}

std::vector<int> consistent_candidates(const GameWorld& world,
                                       std::span<const DialogueTurn> dialogue, const Vocab& vocab) {
  std::vector<int> out;
  for (size_t k = 0; k < world.objects.size(); ++k) {
    if (consistent_with(world.objects[k], dialogue, vocab)) out.push_back(static_cast<int>(k));
  }
  return out;
}

int consistency_guess(const GameWorld& world, std::span<const DialogueTurn> dialogue,
                      const Vocab& vocab) {
  for (size_t k = 0; k < world.objects.size(); ++k) {
    if (consistent_with(world.objects[k], dialogue, vocab)) return static_cast<int>(k);
  }
  return 0;
}

ScriptedExpert::ScriptedExpert(const GameWorld& world, const Vocab& vocab)
    : world_(&world), vocab_(&vocab) {
  for (size_t k = 0; k < world.objects.size(); ++k) candidates_.push_back(static_cast<int>(k));
}

std::vector<int> ScriptedExpert::next_question() const {
  if (candidates_.size() <= 1 || questions_asked_ >= kMaxQuestions) {
    return {vocab_->end_dialogue()};
  }

  // Canonical attribute order so question choice is deterministic.
  std::vector<int> attrs;
  for (int c = 0; c < vocab_->num_categories(); ++c) attrs.push_back(vocab_->category_token(c));
  for (int col = 0; col < 3; ++col) attrs.push_back(vocab_->column_token(col));
  for (int row = 0; row < 3; ++row) attrs.push_back(vocab_->row_token(row));

  int best_attr = -1;
  int best_score = 0;
  for (int attr : attrs) {
    const int question[] = {attr};
    int yes = 0;
    for (int k : candidates_) {
      if (answer_for(world_->objects[static_cast<size_t>(k)], question, *vocab_) == Answer::Yes) {
        ++yes;
      }
    }
    const int no = static_cast<int>(candidates_.size()) - yes;
    const int score = std::min(yes, no);
    if (score > best_score) {
      best_score = score;
      best_attr = attr;
    }
  }
  // All candidates agree on every attribute: no question can shrink the set.
  if (best_attr < 0) return {vocab_->end_dialogue()};

  return {vocab_->id("is"), vocab_->id("it"), best_attr, vocab_->end_question()};
}

void ScriptedExpert::observe(std::span<const int> question, Answer answer) {
  std::vector<int> kept;
  for (int k : candidates_) {
    if (answer_for(world_->objects[static_cast<size_t>(k)], question, *vocab_) == answer) {
      kept.push_back(k);
    }
  }
  candidates_ = std::move(kept);
  ++questions_asked_;
}

}  // namespace tpg
