#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace cspc {

/// Independent substreams carved out of one run seed. Each draw site owns
/// a distinct (kind, indices...) key, so adding clients never shifts the
/// numbers a provider sees and vice versa.
enum class StreamKind : std::uint32_t {
  Client = 1,       // (client) budget, requirement, weights, srp noise
  InitialCaps = 2,  // (provider)
  Honesty = 3,      // (provider, pcc)
  Lottery = 4,      // (provider, pcc, bai)
  SrpResample = 5,  // (client, pcc)
};

using Engine64 = std::mt19937_64;

inline Engine64 make_stream(std::uint64_t seed, StreamKind kind, std::uint64_t a = 0,
                            std::uint64_t b = 0, std::uint64_t c = 0) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), static_cast<std::uint32_t>(kind),
                    lo(a),    hi(a),    lo(b),
                    hi(b),    lo(c),    hi(c)};
  return Engine64(seq);
}

inline double uniform(Engine64& rng, double low, double high) {
  return std::uniform_real_distribution<double>(low, high)(rng);
}

inline bool bernoulli(Engine64& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::bernoulli_distribution(p)(rng);
}

/// Uniformly random permutation of 0..n-1.
inline std::vector<std::size_t> random_permutation(Engine64& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace cspc
