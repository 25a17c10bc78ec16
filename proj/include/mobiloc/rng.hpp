#pragma once

#include <cstdint>

namespace mobiloc {

// Counter-based randomness: every draw in the workbench is a pure function of
// (scenario seed, stream tag, indices), so results do not depend on evaluation
// order and trials can run on any number of workers.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix(mix(a, b), c);
}

inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                                   std::uint64_t d) {
  return mix(mix(a, b, c), d);
}

// Uniform double in [0, 1) from 53 high bits.
inline constexpr double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Stream tags. Keeping them in one place guarantees distinct draws never
// alias across subsystems.
namespace stream {
inline constexpr std::uint64_t deploy = 0x6465706C6F79ull;        // node placement
inline constexpr std::uint64_t range_table = 0x646F695F74626Cull; // irregularity tables
inline constexpr std::uint64_t fading = 0x66616465ull;            // per (stop, sensor) dropout
inline constexpr std::uint64_t relay_fading = 0x72656C6179ull;    // per (stop, relay, sensor)
inline constexpr std::uint64_t waypoint = 0x77617970ull;          // random_waypoint trajectory
}  // namespace stream

// Sequential generator for places that need a stream of draws from one key.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return splitmix64(state_++); }
  double next_uniform01() { return uniform01(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace mobiloc
