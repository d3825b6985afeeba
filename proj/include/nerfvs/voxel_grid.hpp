// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nerfvs/errors.hpp"
#include "nerfvs/sh.hpp"
#include "nerfvs/vec.hpp"

namespace nerfvs {

inline constexpr int kMaxFeatures = 1 + 3 * kMaxShBasis;

/// Raw per-vertex feature vector: [raw density, sh(c=0, b=0..B-1), sh(c=1, ...), sh(c=2, ...)].
using Features = std::array<Real, kMaxFeatures>;

inline Real softplus(Real x) { return x > 20 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline Real sigmoid(Real x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const Real e = std::exp(x);
    return e / (1.0 + e);
}

/// Location of a point inside the grid: lower corner index and fractional
/// offsets in [0, 1] along each axis.
struct GridCell {
    int ix = 0, iy = 0, iz = 0;
    Real fx = 0, fy = 0, fz = 0;

    /// Trilinear weight of corner (dx, dy, dz), each 0 or 1.
    Real weight(int dx, int dy, int dz) const {
        return (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy) * (dz ? fz : 1 - fz);
    }
};

/// Dense trainable radiance field on an R x R x R vertex lattice spanning
/// [-1, 1]^3. Each vertex stores a raw density and spherical-harmonic color
/// coefficients for three channels; values between vertices are trilinear.
class VoxelGrid {
public:
    VoxelGrid() = default;

    VoxelGrid(int resolution, int sh_degree) : resolution_(resolution), sh_degree_(sh_degree) {
        if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
        if (sh_degree < 0 || sh_degree > kMaxShDegree) throw ConfigError("unsupported spherical-harmonic degree");
        params_.assign(vertex_count() * feature_count(), 0.0);
    }

    int resolution() const { return resolution_; }
    int sh_degree() const { return sh_degree_; }
    int basis_count() const { return sh_basis_count(sh_degree_); }
    int feature_count() const { return 1 + 3 * basis_count(); }
    std::size_t vertex_count() const {
        return static_cast<std::size_t>(resolution_) * resolution_ * resolution_;
    }
    std::size_t parameter_count() const { return params_.size(); }
    Real cell_size() const { return 2.0 / (resolution_ - 1); }

    std::size_t vertex_index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * resolution_ + j) * resolution_ + i;
    }
    Vec3 vertex_position(int i, int j, int k) const {
        const Real h = cell_size();
        return {-1 + i * h, -1 + j * h, -1 + k * h};
    }

    std::span<Real> params() { return params_; }
    std::span<const Real> params() const { return params_; }

    Real& raw_density(std::size_t v) { return params_[v * feature_count()]; }
    Real raw_density(std::size_t v) const { return params_[v * feature_count()]; }
    Real& sh(std::size_t v, int channel, int b) { return params_[v * feature_count() + 1 + channel * basis_count() + b]; }
    Real sh(std::size_t v, int channel, int b) const {
        return params_[v * feature_count() + 1 + channel * basis_count() + b];
    }

    /// Clamps the point to [-1, 1]^3 and finds its cell.
    GridCell locate(const Vec3& p) const {
        GridCell c;
        const Real scale = 0.5 * (resolution_ - 1);
        auto axis = [&](Real x, int& i, Real& f) {
            const Real g = (std::clamp(x, Real(-1), Real(1)) + 1) * scale;
            i = std::min(static_cast<int>(std::floor(g)), resolution_ - 2);
            f = g - i;
        };
        axis(p.x, c.ix, c.fx);
        axis(p.y, c.iy, c.fy);
        axis(p.z, c.iz, c.fz);
        return c;
    }

    Features interpolate(const GridCell& c) const {
        Features out{};
        const int nf = feature_count();
        for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const Real w = c.weight(dx, dy, dz);
                    const Real* src = &params_[vertex_index(c.ix + dx, c.iy + dy, c.iz + dz) * nf];
                    for (int f = 0; f < nf; ++f) out[f] += w * src[f];
                }
        return out;
    }

    Features trilinear_sample(const Vec3& p) const { return interpolate(locate(p)); }

    /// Adds the feature gradient into the eight corner slots of `grad`
    /// (same layout as params()) with the trilinear weights.
    void scatter(const GridCell& c, std::span<const Real> dfeatures, std::span<Real> grad) const {
        const int nf = feature_count();
        for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const Real w = c.weight(dx, dy, dz);
                    Real* dst = &grad[vertex_index(c.ix + dx, c.iy + dy, c.iz + dz) * nf];
                    for (int f = 0; f < nf; ++f) dst[f] += w * dfeatures[f];
                }
    }

    bool operator==(const VoxelGrid&) const = default;

private:
    int resolution_ = 0;
    int sh_degree_ = 0;
    std::vector<Real> params_;
};

/// Raw density whose softplus is 0.1.
inline const Real kInitialRawDensity = std::log(std::expm1(0.1));

inline VoxelGrid init_grid(int resolution, int sh_degree, std::uint64_t seed) {
    VoxelGrid grid(resolution, sh_degree);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> dc(-0.1, 0.1);
    for (std::size_t v = 0; v < grid.vertex_count(); ++v) {
        grid.raw_density(v) = kInitialRawDensity;
        for (int c = 0; c < 3; ++c) grid.sh(v, c, 0) = dc(rng);
    }
    return grid;
}

/// Density and color at one point for one viewing direction.
struct FieldSample {
    Real sigma = 0;
    Vec3 rgb;
};

/// Forward state kept for the backward pass through one field evaluation.
struct FieldEval {
    GridCell cell;
    Features features{};
    std::array<Real, kMaxShBasis> basis{};
    FieldSample sample;
};

inline FieldEval eval_field_full(const VoxelGrid& grid, const Vec3& point, const Vec3& direction) {
    FieldEval e;
    e.cell = grid.locate(point);
    e.features = grid.interpolate(e.cell);
    e.basis = sh_basis(grid.sh_degree(), direction);
    e.sample.sigma = softplus(e.features[0]);
    const int nb = grid.basis_count();
    for (int c = 0; c < 3; ++c) {
        Real s = 0;
        for (int b = 0; b < nb; ++b) s += e.features[1 + c * nb + b] * e.basis[b];
        e.sample.rgb[c] = sigmoid(s);
    }
    return e;
}

inline FieldSample eval_field(const VoxelGrid& grid, const Vec3& point, const Vec3& direction) {
    return eval_field_full(grid, point, direction).sample;
}

/// Gradient of a scalar objective w.r.t. the interpolated feature vector,
/// given its gradients w.r.t. sigma and rgb.
inline Features field_backward(const VoxelGrid& grid, const FieldEval& e, Real dsigma, const Vec3& drgb) {
    Features df{};
    df[0] = dsigma * sigmoid(e.features[0]);
    const int nb = grid.basis_count();
    for (int c = 0; c < 3; ++c) {
        const Real y = e.sample.rgb[c];
        const Real dlogit = drgb[c] * y * (1 - y);
        for (int b = 0; b < nb; ++b) df[1 + c * nb + b] = dlogit * e.basis[b];
    }
    return df;
}

}  // namespace nerfvs
