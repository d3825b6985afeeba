// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "nerfvs/errors.hpp"
#include "nerfvs/vec.hpp"

namespace nerfvs {

inline constexpr int kMaxShDegree = 2;
inline constexpr int kMaxShBasis = (kMaxShDegree + 1) * (kMaxShDegree + 1);

constexpr int sh_basis_count(int degree) { return (degree + 1) * (degree + 1); }

/// Real spherical harmonics up to `degree` evaluated at unit direction d,
/// in the usual (l, m) order: Y00, Y1-1, Y10, Y11, Y2-2, ..., Y22.
inline std::array<Real, kMaxShBasis> sh_basis(int degree, const Vec3& d) {
    if (degree < 0 || degree > kMaxShDegree) throw ConfigError("unsupported spherical-harmonic degree");
    constexpr Real c0 = 0.28209479177387814;
    constexpr Real c1 = 0.4886025119029199;
    constexpr Real c2a = 1.0925484305920792;
    constexpr Real c2b = 0.31539156525252005;
    constexpr Real c2c = 0.5462742152960396;
    std::array<Real, kMaxShBasis> y{};
    y[0] = c0;
    if (degree >= 1) {
        y[1] = -c1 * d.y;
        y[2] = c1 * d.z;
        y[3] = -c1 * d.x;
    }
    if (degree >= 2) {
        y[4] = c2a * d.x * d.y;
        y[5] = -c2a * d.y * d.z;
        y[6] = c2b * (2 * d.z * d.z - d.x * d.x - d.y * d.y);
        y[7] = -c2a * d.x * d.z;
        y[8] = c2c * (d.x * d.x - d.y * d.y);
    }
    return y;
}

}  // namespace nerfvs
