#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tpg/rng.hpp"

namespace tpg {

using BlockId = int;

// One named parameter block plus its gradient accumulator. Vectors are stored
// as a single row (rows == 1). The grad buffer always has the exact shape of
// the value buffer.
struct ParamBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> value;
  std::vector<double> grad;

  int size() const { return rows * cols; }
};

// Flat collection of parameter blocks. Gradients accumulate additively into
// the parallel buffers; sgd_step applies them as an ascent increment
// (value += lr * grad) and clears the accumulator.
class ParamStore {
 public:
  BlockId add(std::string name, int rows, int cols);
  BlockId add_vector(std::string name, int n) { return add(std::move(name), 1, n); }

  BlockId id_of(std::string_view name) const;  // throws std::out_of_range if missing
  bool has(std::string_view name) const;

  ParamBlock& block(BlockId id) { return blocks_[static_cast<size_t>(id)]; }
  const ParamBlock& block(BlockId id) const { return blocks_[static_cast<size_t>(id)]; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int total_params() const;

  // Uniform init in [-half_range, half_range], drawn block by block in
  // registration order.
  void init_uniform(SeededRng& rng, double half_range = 0.08);

  void zero_grads();

  // value += learning_rate * grad for every entry, then zero the accumulator.
  // Refuses the whole update (no block touched) if any gradient entry is
  // non-finite; the error names the offending block.
  void sgd_step(double learning_rate);

  // Flat copies, one vector per block in registration order.
  std::vector<std::vector<double>> value_snapshot() const;
  std::vector<std::vector<double>> grad_snapshot() const;
  void restore_values(const std::vector<std::vector<double>>& snap);

 private:
  std::vector<ParamBlock> blocks_;
};

}  // namespace tpg
