#pragma once

#include <cstdint>
#include <random>

namespace epicap {

/// Mixes extra words into a base seed with splitmix64 steps. Used to derive
/// independent per-day / per-family / per-block streams from one run seed so
/// results do not depend on scheduling order.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a,
                              std::uint64_t b = 0) {
  auto step = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  std::uint64_t s = step(base);
  s = step(s ^ a);
  s = step(s ^ b);
  return s;
}

/// Deterministic uniform(0,1) stream over mt19937_64. Values are strictly
/// inside the open interval, so quantile transforms never see 0 or 1.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    std::uint64_t x = engine_();
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace epicap
