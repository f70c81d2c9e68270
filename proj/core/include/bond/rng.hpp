#pragma once

#include <array>
#include <cstdint>

namespace bond {

/// Deterministic pseudo-random stream: xoshiro256++ seeded through splitmix64.
///
/// The generator and all distribution transforms are implemented here rather
/// than taken from <random> so that a given seed produces the identical bit
/// stream on every platform and standard library. Distribution draws:
/// uniform doubles come from the top 53 bits, normals from the Box-Muller
/// polar method with one cached spare.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double();

    /// Uniform in [lo, hi); returns lo exactly when lo == hi.
    double uniform(double lo, double hi);

    /// Standard normal draw.
    double normal();

    /// +1 or -1 with equal probability.
    double sign();

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n);

  private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives an independent stream seed from a base seed and a role tag, so
/// that data splitting, weight init and perturbation sampling do not share
/// a stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

} // namespace bond
