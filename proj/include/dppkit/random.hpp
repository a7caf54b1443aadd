#ifndef DPPKIT_RANDOM_HPP
#define DPPKIT_RANDOM_HPP

#include <cstdint>
#include <random>

namespace dppkit {

// splitmix64 finalizer; used to spread seeds before feeding the engine.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seeded stream of uniform variates. Every sampling-path operation consumes
// exactly one variate per categorical draw and one per Bernoulli trial, in
// index order, so paired-trace comparisons and reruns are well defined.
// Streams are never shared between threads; derive one per trial instead.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  // Uniform in [0, 1) with 53 random mantissa bits; one engine call.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t seed() const { return seed_; }

  // Independent stream keyed on (seed, index); used for per-trial fan-out.
  RandomStream derived(std::uint64_t index) const {
    return RandomStream(mix64(seed_ ^ mix64(index)));
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

} // namespace dppkit

#endif
