#ifndef TRINITY_RNG_HPP_
#define TRINITY_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace trinity {

// Stream splitting: every random stream in the repository is a std::mt19937_64
// seeded with splitmix64-folded (seed, tag, indices...). A stream therefore
// depends only on its coordinates, never on the order streams are consumed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  return Engine(derive_seed(seed, coords));
}

// Stream tags.
enum class Stream : std::uint64_t {
  kPopulation = 1,
  kDay = 2,
  kInit = 3,
  kShuffle = 4,
  kNoise = 5,
};

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace trinity

#endif  // TRINITY_RNG_HPP_
