#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tpg {

// Deterministic random stream. mt19937_64 output is bit-specified by the
// standard; the uniform draw below avoids std::uniform_real_distribution,
// whose mapping is implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 bits of entropy.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant at this scale.
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

 private:
  std::mt19937_64 engine_;
};

// Labeled seed derivation: one master seed fans out into independent streams,
// so changing how many draws one consumer makes cannot shift any other stream.
uint64_t derive_seed(uint64_t master, std::string_view label);
uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t a);
uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t a, uint64_t b);
uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t a, uint64_t b, uint64_t c);

}  // namespace tpg
