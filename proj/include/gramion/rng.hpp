#pragma once

#include <cstdint>
#include <random>

namespace gramion {

/// Portable uniform sampler. std::mt19937_64 has a fully specified output
/// sequence; the conversion to [0, 1) keeps the top 53 bits of each draw,
/// u = (x >> 11) * 2^-53, so identical seeds give identical doubles on every
/// platform (std::uniform_real_distribution gives no such guarantee).
class UniformSampler {
public:
    explicit UniformSampler(std::uint64_t seed) : engine_(seed) {}

    double next01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next01(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace gramion
