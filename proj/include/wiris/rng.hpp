#pragma once

#include <cstdint>
#include <initializer_list>

namespace wiris {

/// splitmix64 step; the standard 64-bit finalizer-based generator.
uint64_t splitmix64(uint64_t& state);

/// Deterministically folds a list of values into one seed.
uint64_t hash_seed(std::initializer_list<uint64_t> parts);

/// Seeded generator with uniform and Gaussian draws. The Gaussian uses
/// Box-Muller over splitmix64 output so sequences are identical across
/// standard-library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform double in (0, 1].
    double uniform_open();

    /// Standard normal draw.
    double gaussian();

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n);

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace wiris
