#include "tpg/vocab.hpp"

#include <fstream>
#include <stdexcept>

#include "tpg/errors.hpp"

namespace tpg {

Vocab Vocab::build(int num_categories) {
  if (num_categories < 2) throw std::invalid_argument("need at least 2 categories");
  Vocab v;
  v.num_categories_ = num_categories;
  v.words_ = {"<start>", "<eoq>", "<eod>", "yes",  "no",     "na",
              "is",      "it",    "a",     "in",   "left",   "center",
              "right",   "top",   "middle", "bottom"};
  for (int c = 0; c < num_categories; ++c) v.words_.push_back("cat" + std::to_string(c));
  for (int i = 0; i < static_cast<int>(v.words_.size()); ++i) {
    v.ids_[v.words_[static_cast<size_t>(i)]] = i;
  }
  return v;
}

void Vocab::check_id(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id outside vocabulary");
}

const std::string& Vocab::word(int id) const {
  check_id(id);
  return words_[static_cast<size_t>(id)];
}

int Vocab::id(const std::string& word) const {
  auto it = ids_.find(word);
  if (it == ids_.end()) throw std::out_of_range("unknown word: " + word);
  return it->second;
}

bool Vocab::contains(const std::string& word) const { return ids_.count(word) > 0; }

bool Vocab::is_category(int id) const {
  check_id(id);
  return id >= kFirstCategory;
}

int Vocab::category_of(int id) const {
  if (!is_category(id)) throw std::invalid_argument("not a category token");
  return id - kFirstCategory;
}

int Vocab::category_token(int category) const {
  if (category < 0 || category >= num_categories_) {
    throw std::out_of_range("category outside configured range");
  }
  return kFirstCategory + category;
}

bool Vocab::is_column(int id) const {
  check_id(id);
  return id >= kFirstColumn && id < kFirstColumn + 3;
}

int Vocab::column_of(int id) const {
  if (!is_column(id)) throw std::invalid_argument("not a column token");
  return id - kFirstColumn;
}

int Vocab::column_token(int col) const {
  if (col < 0 || col >= 3) throw std::out_of_range("column outside 0..2");
  return kFirstColumn + col;
}

bool Vocab::is_row(int id) const {
  check_id(id);
  return id >= kFirstRow && id < kFirstRow + 3;
}

int Vocab::row_of(int id) const {
  if (!is_row(id)) throw std::invalid_argument("not a row token");
  return id - kFirstRow;
}

int Vocab::row_token(int row) const {
  if (row < 0 || row >= 3) throw std::out_of_range("row outside 0..2");
  return kFirstRow + row;
}

bool Vocab::is_attribute(int id) const {
  return is_category(id) || is_column(id) || is_row(id);
}

void Vocab::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open vocabulary file for writing: " + path);
  for (int i = 0; i < size(); ++i) {
    out << i << '\t' << words_[static_cast<size_t>(i)] << '\n';
  }
  if (!out) throw IoError("failed writing vocabulary file: " + path);
}

}  // namespace tpg
