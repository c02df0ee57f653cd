#ifndef IMPUTE_RNG_HPP
#define IMPUTE_RNG_HPP

#include <cstdint>
#include <string_view>

namespace impute {

/// Deterministic 64-bit generator (xoshiro256** seeded via splitmix64).
/// All randomness in the library flows through this class so that a run is
/// reproducible from a single seed. Named sub-streams let independent
/// components (split, init, mask, ga) draw from unrelated sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n); n must be > 0.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller on the uniform stream.
  double normal();

  /// Independent generator derived from this seed, a stream name and an
  /// index. Drawing from the parent does not perturb derived streams.
  static Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

 private:
  std::uint64_t state_[4];
};

}  // namespace impute

#endif
