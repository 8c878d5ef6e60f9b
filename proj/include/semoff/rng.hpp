#pragma once

#include <cstdint>
#include <limits>

namespace semoff {

// Named random streams. Every stream is derived from the master seed so that
// enabling one feature never shifts the draws of another.
enum class Stream : std::uint64_t {
  geometry = 1,
  channel = 2,
  shadowing = 3,
  arrivals = 4,
  actor_init = 5,
  actor_noise = 6,
  replay = 7,
  random_policy = 8,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based seed derivation: the result depends only on the tuple, never
// on how many draws were taken before.
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t a = 0,
                                    std::uint64_t b = 0) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632BE59BD9B4E019ULL));
  return h;
}

// Small UniformRandomBitGenerator over a splitmix64 sequence. Cheap to
// construct, so one instance per (seed, slot, device) key is fine.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterEngine(std::uint64_t seed) noexcept
      : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace semoff
