#pragma once

#include <cstdint>
#include <random>

namespace nosc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive an independent seed for (stream, index) so sample i never depends on
// how many samples were drawn before it.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ (stream * 0xd1b54a32d192ed03ULL)) + index);
}

// mt19937_64 with a portable uniform mapping (std distributions differ between
// standard libraries; this one does not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Named sampling streams so probe, calibration, training and validation sets
// never overlap.
namespace stream {
inline constexpr std::uint64_t probe = 1;
inline constexpr std::uint64_t validation = 2;
inline constexpr std::uint64_t calibration = 3;
inline constexpr std::uint64_t training = 4;
inline constexpr std::uint64_t heldout = 5;
inline constexpr std::uint64_t features = 6;
inline constexpr std::uint64_t causality = 7;
inline constexpr std::uint64_t perturbation = 8;
inline constexpr std::uint64_t coupling = 9;
}  // namespace stream

}  // namespace nosc
