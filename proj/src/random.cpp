#include "genshift/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace genshift {

Vec3 PortableRandom::unit_vector()
{
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

} // namespace genshift
