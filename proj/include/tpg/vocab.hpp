#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace tpg {

// Closed token vocabulary for the question game. Layout is fixed so ids are
// stable across runs and checkpoints:
//   0 <start>  1 <eoq>  2 <eod>  3 yes  4 no  5 na
//   6..9   fillers: is, it, a, in
//   10..12 columns: left, center, right
//   13..15 rows: top, middle, bottom
//   16..   categories: cat0 .. cat{C-1}
class Vocab {
 public:
  static Vocab build(int num_categories);

  int size() const { return static_cast<int>(words_.size()); }
  int num_categories() const { return num_categories_; }

  const std::string& word(int id) const;
  int id(const std::string& word) const;
  bool contains(const std::string& word) const;

  int start() const { return 0; }
  int end_question() const { return 1; }
  int end_dialogue() const { return 2; }
  int yes() const { return 3; }
  int no() const { return 4; }
  int not_applicable() const { return 5; }

  bool is_category(int id) const;
  int category_of(int id) const;
  int category_token(int category) const;

  bool is_column(int id) const;
  int column_of(int id) const;
  int column_token(int col) const;

  bool is_row(int id) const;
  int row_of(int id) const;
  int row_token(int row) const;

  // Category, column, or row token: the tokens the answer semantics read.
  bool is_attribute(int id) const;

  // One "id<TAB>word" line per token.
  void write_file(const std::string& path) const;

 private:
  static constexpr int kFirstColumn = 10;
  static constexpr int kFirstRow = 13;
  static constexpr int kFirstCategory = 16;

  int num_categories_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;

  void check_id(int id) const;
};

}  // namespace tpg
