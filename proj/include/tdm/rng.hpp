#pragma once

#include <cmath>
#include <cstdint>

namespace tdm {

// Counter-based RNG: every draw is a pure function of (seed, counter), so
// streams are reproducible across platforms and independent of call order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  // Uniform in (0, 1]; never returns 0 so log() below is safe.
  double uniform_at(std::uint64_t counter) const {
    std::uint64_t bits = splitmix64(splitmix64(seed_) ^ counter);
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal_at(std::uint64_t counter) const {
    const double u1 = uniform_at(2 * counter);
    const double u2 = uniform_at(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double next_uniform() { return uniform_at(counter_++); }
  double next_normal() { return normal_at(counter_++); }

  // Uniform integer in [0, n)
  std::uint64_t next_index(std::uint64_t n) {
    std::uint64_t bits = splitmix64(splitmix64(seed_) ^ counter_++);
    return bits % n;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace tdm
