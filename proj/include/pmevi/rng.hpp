#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pmevi {

/// Portable seeded generator.
///
/// The raw stream is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. Conversions to doubles are done here rather than through
/// <random> distributions, whose algorithms are implementation-defined:
///   uniform()      = (x >> 11) * 2^-53, in [0, 1)
///   exponential()  = -log(1 - uniform())
/// so the same seed yields the same draws on every conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential() { return -std::log1p(-uniform()); }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace pmevi
