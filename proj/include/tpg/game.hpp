#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tpg/rng.hpp"
#include "tpg/vocab.hpp"

namespace tpg {

struct WorldConfig {
  int num_objects = 8;
  int num_categories = 5;

  void validate() const;
  bool operator==(const WorldConfig&) const = default;
};

// One object on the table: a category and a cell in the 3x3 grid.
struct GameObject {
  int category = 0;
  int col = 0;
  int row = 0;

  bool operator==(const GameObject&) const = default;
};

struct GameWorld {
  std::vector<GameObject> objects;
  int target = 0;
  std::uint64_t seed = 0;
};

// Samples a world from the seed alone. The target must differ from at least
// one other object in some attribute; resampling past 100 attempts raises
// ConfigError.
GameWorld new_game(const WorldConfig& config, std::uint64_t seed);
// Same, with the seed drawn from rng (stored in the world for replay).
GameWorld new_game(const WorldConfig& config, SeededRng& rng);

enum class Answer { Yes, No, NotApplicable };

int answer_token(Answer a, const Vocab& vocab);
Answer answer_from_token(int token, const Vocab& vocab);
const char* to_string(Answer a);

// Reads the question as the conjunction of its attribute tokens: yes when the
// object satisfies every one, no when it fails any, not-applicable when the
// question names no attribute at all. Every token sequence gets an answer.
Answer answer_for(const GameObject& object, std::span<const int> question, const Vocab& vocab);

// answer_for applied to the target.
Answer oracle_answer(const GameWorld& world, std::span<const int> question, const Vocab& vocab);

// 1.0 iff guess is the target index; out-of-range guesses are an error.
double guess_reward(const GameWorld& world, int guess);

struct DialogueTurn {
  std::vector<int> question;
  Answer answer = Answer::NotApplicable;
};

bool consistent_with(const GameObject& object, std::span<const DialogueTurn> dialogue,
                     const Vocab& vocab);
std::vector<int> consistent_candidates(const GameWorld& world,
                                       std::span<const DialogueTurn> dialogue, const Vocab& vocab);
// Lowest-index object consistent with every answer; 0 when nothing is (a
// truthful oracle always leaves the target consistent, so that arm is for
// malformed transcripts only).
int consistency_guess(const GameWorld& world, std::span<const DialogueTurn> dialogue,
                      const Vocab& vocab);

// Rule-based questioner used to produce pretraining data. Asks single-attribute
// questions "is it <attr> <eoq>", picking the attribute (categories first,
// then columns, then rows) whose yes/no split of the current candidate set is
// most balanced. Emits <eod> once one candidate remains, no attribute splits
// the candidates, or the question cap is hit.
class ScriptedExpert {
 public:
  static constexpr int kMaxQuestions = 8;

  ScriptedExpert(const GameWorld& world, const Vocab& vocab);

  // Tokens of the next question, terminator included; a single <eod> when done.
  std::vector<int> next_question() const;
  void observe(std::span<const int> question, Answer answer);

  const std::vector<int>& candidates() const { return candidates_; }
  int questions_asked() const { return questions_asked_; }

 private:
  const GameWorld* world_;
  const Vocab* vocab_;
  std::vector<int> candidates_;
  int questions_asked_ = 0;
};

}  // namespace tpg
