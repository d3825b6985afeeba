// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "nerfvs/camera.hpp"
#include "nerfvs/errors.hpp"
#include "nerfvs/voxel_grid.hpp"

namespace nerfvs {

/// Quadrature nodes along one ray. delta_i = t_{i+1} - t_i, and the last
/// delta runs to t_far.
struct RaySamples {
    std::vector<Real> ts;
    std::vector<Real> deltas;
    std::vector<Vec3> points;
    Vec3 direction;

    std::size_t size() const { return ts.size(); }
};

/// Small counter-based engine for per-ray jitter streams.
struct SplitMix64 {
    using result_type = std::uint64_t;
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

/// Splits [t_near, t_far] into n equal bins and places one node per bin:
/// at the midpoint when `rng` is null, uniformly inside the bin otherwise.
template <typename Rng>
    requires(sizeof(typename Rng::result_type) == 8)
void sample_ray_into(const Ray& ray, int n_samples, Rng* rng, RaySamples& out) {
    if (n_samples < 2) throw ConfigError("a ray needs at least two samples");
    if (!(ray.t_far > ray.t_near)) throw ContractError("ray interval is empty");
    const std::size_t n = static_cast<std::size_t>(n_samples);
    out.ts.resize(n);
    out.deltas.resize(n);
    out.points.resize(n);
    out.direction = ray.direction;
    const Real width = (ray.t_far - ray.t_near) / n_samples;
    for (std::size_t i = 0; i < n; ++i) {
        // 53 random bits give a uniform value in [0, 1).
        const Real u = rng ? static_cast<Real>((*rng)() >> 11) * 0x1.0p-53 : 0.5;
        out.ts[i] = ray.t_near + (static_cast<Real>(i) + u) * width;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) out.deltas[i] = out.ts[i + 1] - out.ts[i];
    out.deltas[n - 1] = ray.t_far - out.ts[n - 1];
    for (std::size_t i = 0; i < n; ++i) out.points[i] = ray.at(out.ts[i]);
}

inline RaySamples sample_ray(const Ray& ray, int n_samples, std::optional<std::uint64_t> jitter_seed = std::nullopt) {
    RaySamples s;
    if (jitter_seed) {
        std::mt19937_64 rng(*jitter_seed);
        sample_ray_into(ray, n_samples, &rng, s);
    } else {
        sample_ray_into(ray, n_samples, static_cast<std::mt19937_64*>(nullptr), s);
    }
    return s;
}

struct RayRenderResult {
    Vec3 color;
    Real depth = 0;
    Real opacity = 0;
    std::vector<Real> weights;
    Real weight_var = 0;
    Real color_var = 0;
};

/// Gradients of a scalar objective w.r.t. the five composited outputs.
struct RenderGrads {
    Vec3 color;
    Real depth = 0;
    Real opacity = 0;
    Real weight_var = 0;
    Real color_var = 0;
};

/// Gradients w.r.t. each sample's density and color.
struct SampleGrads {
    std::vector<Real> dsigma;
    std::vector<Vec3> drgb;
    std::vector<Real> transmittance_after;  // T_{i+1}, scratch for the backward pass
};

inline void check_composite_inputs(const RaySamples& s, std::span<const FieldSample> f) {
    if (f.size() != s.size() || s.deltas.size() != s.size())
        throw ContractError("sample and field arrays differ in length");
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i].sigma >= 0)) throw ContractError("negative density passed to composite");
        if (!(s.deltas[i] >= 0)) throw ContractError("negative interval passed to composite");
    }
}

inline void composite_into(const RaySamples& s, std::span<const FieldSample> f, RayRenderResult& r) {
    check_composite_inputs(s, f);
    const std::size_t n = s.size();
    r.weights.resize(n);
    r.color = {};
    r.depth = 0;
    r.opacity = 0;
    Real transmittance = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const Real tau = f[i].sigma * s.deltas[i];
        const Real alpha = -std::expm1(-tau);
        const Real w = transmittance * alpha;
        r.weights[i] = w;
        r.color += f[i].rgb * w;
        r.depth += w * s.ts[i];
        r.opacity += w;
        transmittance *= std::exp(-tau);
    }
    r.weight_var = 0;
    r.color_var = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Real dt = s.ts[i] - r.depth;
        r.weight_var += r.weights[i] * dt * dt;
        const Vec3 dc = f[i].rgb - r.color;
        r.color_var += r.weights[i] * dot(dc, dc);
    }
}

inline RayRenderResult composite(const RaySamples& s, std::span<const FieldSample> f) {
    RayRenderResult r;
    composite_into(s, f, r);
    return r;
}

/// Analytic gradients of composite(). The weights inside color_var are
/// treated as constants, so color_var reaches the densities only through
/// the composited color it is centered on.
inline void composite_backward_into(const RaySamples& s, std::span<const FieldSample> f, const RayRenderResult& r,
                                    const RenderGrads& up, SampleGrads& out) {
    const std::size_t n = s.size();
    out.dsigma.assign(n, 0.0);
    out.drgb.assign(n, Vec3{});
    const Real opacity = r.opacity;
    // Effective gradients on color and depth including the paths through
    // the centering terms of the two variances.
    const Vec3 g_color = up.color - (r.color - r.color * opacity) * (2 * up.color_var);
    const Real g_depth = up.depth - 2 * up.weight_var * (r.depth - r.depth * opacity);

    // g_w[i] = dL/dw_i holding the other weights fixed; accumulated from the back.
    Real suffix = 0;  // sum_{i>k} w_i g_w[i]
    auto& trans_after = out.transmittance_after;
    trans_after.resize(n);
    {
        Real t = 1;
        for (std::size_t i = 0; i < n; ++i) {
            t *= std::exp(-f[i].sigma * s.deltas[i]);
            trans_after[i] = t;
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        const Real dt = s.ts[k] - r.depth;
        const Real gw = dot(g_color, f[k].rgb) + g_depth * s.ts[k] + up.opacity + up.weight_var * dt * dt;
        out.dsigma[k] = s.deltas[k] * (trans_after[k] * gw - suffix);
        suffix += r.weights[k] * gw;
        out.drgb[k] = g_color * r.weights[k] + (f[k].rgb - r.color) * (2 * up.color_var * r.weights[k]);
    }
}

inline SampleGrads composite_backward(const RaySamples& s, std::span<const FieldSample> f, const RayRenderResult& r,
                                      const RenderGrads& up) {
    SampleGrads g;
    composite_backward_into(s, f, r, up, g);
    return g;
}

}  // namespace nerfvs
