#pragma once

#include <cstdint>

#include "kam/spectral_field.hpp"

namespace kam {

/// Seeded random real trigonometric field on |k|_inf <= kmax. Each component
/// of X_k is (u + i v) exp(-2 pi s |k|_1) with u, v uniform in [-1, 1]
/// (mode 0 real), then the field is scaled so that |X|_s = eps.
FourierField random_field(int n, double s, double eps, int kmax, std::uint64_t seed);

}  // namespace kam
