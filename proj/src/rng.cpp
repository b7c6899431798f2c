#include "tpg/rng.hpp"

namespace tpg {
namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

uint64_t fnv1a_bytes(uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t mix(uint64_t master, std::string_view label, const uint64_t* idx, size_t n) {
  uint64_t h = fnv1a_bytes(kFnvOffset, &master, sizeof master);
  h = fnv1a_bytes(h, label.data(), label.size());
  h = fnv1a_bytes(h, idx, n * sizeof(uint64_t));
  return splitmix64(h);
}

}  // namespace

uint64_t derive_seed(uint64_t master, std::string_view label) {
  return mix(master, label, nullptr, 0);
}

uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t a) {
  return mix(master, label, &a, 1);
}

uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t a, uint64_t b) {
  uint64_t idx[2] = {a, b};
  return mix(master, label, idx, 2);
}

uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t idx[3] = {a, b, c};
  return mix(master, label, idx, 3);
}

}  // namespace tpg
