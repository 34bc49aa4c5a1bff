#pragma once

// Portable seeded random streams.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
// The library distributions in <random> are implementation-defined, so the
// uniform and normal draws below are computed from raw engine output:
//   uniform: top 53 bits of one engine word scaled by 2^-53, in [0, 1)
//   normal:  Box-Muller on two uniforms, both outputs used in order
// Streams: Rng(seed, stream) seeds the engine with splitmix64(seed) mixed with
// splitmix64(stream + golden-ratio increment), so distinct (seed, stream)
// pairs give unrelated sequences.

#include <cstdint>
#include <random>

namespace minima {

/// Named stream tags. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    Init = 1,
    TrainData = 2,
    TestData = 3,
    Sharpness = 4,
    Directions = 5,
    Test = 99,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);
    Rng(std::uint64_t seed, Stream stream) : Rng(seed, static_cast<std::uint64_t>(stream)) {}

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace minima
