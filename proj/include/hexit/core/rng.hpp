#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hexit {

using Rng = std::mt19937_64;

constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for a (master, id...) tuple. Used wherever work is
// split across workers so that scheduling can never perturb randomness.
inline uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> ids) {
  uint64_t h = splitmix64(master);
  for (uint64_t id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream tags so that e.g. exploration and labelling of the same game id never
// share a seed.
enum class Stream : uint64_t {
  explore = 1,
  label = 2,
  value = 3,
  train = 4,
  init = 5,
  match = 6,
  reinforce = 7,
};

inline uint64_t derive_seed(uint64_t master, Stream s, std::initializer_list<uint64_t> ids) {
  uint64_t h = derive_seed(master, {static_cast<uint64_t>(s)});
  for (uint64_t id : ids) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

inline int uniform_int(Rng& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

inline double uniform_real(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace hexit
