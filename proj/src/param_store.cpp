#include "tpg/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace tpg {

BlockId ParamStore::add(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("param block '" + name + "' needs positive shape");
  }
  if (has(name)) {
    throw std::invalid_argument("duplicate param block '" + name + "'");
  }
  ParamBlock b;
  b.name = std::move(name);
  b.rows = rows;
  b.cols = cols;
  b.value.assign(static_cast<size_t>(rows) * cols, 0.0);
  b.grad.assign(static_cast<size_t>(rows) * cols, 0.0);
  blocks_.push_back(std::move(b));
  return static_cast<BlockId>(blocks_.size() - 1);
}

BlockId ParamStore::id_of(std::string_view name) const {
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name == name) return static_cast<BlockId>(i);
  }
  throw std::out_of_range("no param block named '" + std::string(name) + "'");
}

bool ParamStore::has(std::string_view name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return true;
  }
  return false;
}

int ParamStore::total_params() const {
  int n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n;
}

void ParamStore::init_uniform(SeededRng& rng, double half_range) {
  for (auto& b : blocks_) {
    for (auto& v : b.value) v = rng.uniform(-half_range, half_range);
  }
}

void ParamStore::zero_grads() {
  for (auto& b : blocks_) {
    std::fill(b.grad.begin(), b.grad.end(), 0.0);
  }
}

void ParamStore::sgd_step(double learning_rate) {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("sgd_step requires learning_rate > 0");
  }
  for (const auto& b : blocks_) {
    for (double g : b.grad) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("non-finite gradient in block '" + b.name + "'; update refused");
      }
    }
  }
  for (auto& b : blocks_) {
    for (size_t i = 0; i < b.value.size(); ++i) b.value[i] += learning_rate * b.grad[i];
    std::fill(b.grad.begin(), b.grad.end(), 0.0);
  }
}

std::vector<std::vector<double>> ParamStore::value_snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.value);
  return out;
}

std::vector<std::vector<double>> ParamStore::grad_snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.grad);
  return out;
}

void ParamStore::restore_values(const std::vector<std::vector<double>>& snap) {
  if (snap.size() != blocks_.size()) {
    throw std::invalid_argument("snapshot block count mismatch");
  }
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (snap[i].size() != blocks_[i].value.size()) {
      throw std::invalid_argument("snapshot shape mismatch for block '" + blocks_[i].name + "'");
    }
    blocks_[i].value = snap[i];
  }
}

}  // namespace tpg
