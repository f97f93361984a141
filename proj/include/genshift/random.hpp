#pragma once

#include "genshift/mesh.hpp"

#include <cstdint>
#include <random>

namespace genshift {

/// Seeded generator whose output is identical on every platform: the
/// standard fixes the mt19937_64 sequence, and the real-valued mappings
/// below avoid the implementation-defined std distributions.
class PortableRandom {
public:
    explicit PortableRandom(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform on the unit sphere (Archimedes: z uniform, azimuth uniform).
    Vec3 unit_vector();

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace genshift
