// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "nerfvs/bvh.hpp"
#include "nerfvs/camera.hpp"
#include "nerfvs/parallel.hpp"
#include "nerfvs/raster.hpp"

namespace nerfvs {

/// Per-pixel Euclidean distance from the camera center to the scaffold
/// surface. Pixels whose ray leaves the scene hold +infinity.
struct DistanceMap {
    Raster<Real> values;

    static constexpr Real kMiss = std::numeric_limits<Real>::infinity();

    int width() const { return values.width; }
    int height() const { return values.height; }
    Real operator()(int x, int y) const { return values(x, y); }
    static bool is_hit(Real v) { return std::isfinite(v); }

    Raster<float> to_float() const {
        Raster<float> out(values.width, values.height);
        for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = static_cast<float>(values.values[i]);
        return out;
    }
    static DistanceMap from_float(const Raster<float>& r) {
        DistanceMap m;
        m.values = Raster<Real>(r.width, r.height);
        for (std::size_t i = 0; i < r.size(); ++i)
            m.values.values[i] = std::isfinite(r.values[i]) ? Real(r.values[i]) : kMiss;
        return m;
    }
};

/// Number of training cameras that observe the surface seen through each
/// pixel; 0 where the pixel ray misses the scaffold.
struct CoverageMap {
    Raster<int> values;

    int width() const { return values.width; }
    int height() const { return values.height; }
    int operator()(int x, int y) const { return values(x, y); }

    Raster<float> to_float() const {
        Raster<float> out(values.width, values.height);
        for (std::size_t i = 0; i < values.size(); ++i) out.values[i] = static_cast<float>(values.values[i]);
        return out;
    }
    static CoverageMap from_float(const Raster<float>& r) {
        CoverageMap m;
        m.values = Raster<int>(r.width, r.height);
        for (std::size_t i = 0; i < r.size(); ++i) {
            const float v = r.values[i];
            if (!std::isfinite(v) || v < 0 || v != std::round(v)) throw DataError("coverage raster holds a non-count value");
            m.values.values[i] = static_cast<int>(v);
        }
        return m;
    }
};

/// Default shadow-map depth tolerance in scene units.
inline constexpr Real kDefaultShadowEps = 0.01;

inline DistanceMap bake_distance_map(const Scaffold& scaffold, const CameraModel& cam, int threads = 1) {
    DistanceMap dm;
    dm.values = Raster<Real>(cam.width, cam.height, DistanceMap::kMiss);
    parallel_for(static_cast<std::size_t>(cam.height), threads, [&](std::size_t y0, std::size_t y1, int) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y)
            for (int x = 0; x < cam.width; ++x)
                if (const auto hit = scaffold.raycast(pixel_center_ray(cam, x, y))) dm.values(x, y) = hit->t;
    });
    return dm;
}

/// Shadow-map test: true when `point` projects inside the camera frustum
/// and its distance matches the nearest-pixel distance map entry within eps.
inline bool visibility_test(const Vec3& point, const CameraModel& cam, const DistanceMap& dmap, Real eps) {
    const Projection p = project_point(cam, point);
    if (!p.in_frustum(cam)) return false;
    const int x = std::min(static_cast<int>(std::floor(p.px)), dmap.width() - 1);
    const int y = std::min(static_cast<int>(std::floor(p.py)), dmap.height() - 1);
    const Real stored = dmap(x, y);
    if (!DistanceMap::is_hit(stored)) return false;
    return std::abs(p.dist - stored) <= eps;
}

inline CoverageMap bake_coverage_map(const Scaffold& scaffold, const CameraModel& target,
                                     std::span<const CameraModel> training_cameras,
                                     std::span<const DistanceMap> training_dmaps, Real eps = kDefaultShadowEps,
                                     int threads = 1) {
    if (training_cameras.size() != training_dmaps.size())
        throw ConfigError("coverage baking needs exactly one distance map per training camera");
    for (std::size_t i = 0; i < training_cameras.size(); ++i)
        if (training_dmaps[i].width() != training_cameras[i].width ||
            training_dmaps[i].height() != training_cameras[i].height)
            throw ConfigError("distance map size does not match its camera");
    CoverageMap cov;
    cov.values = Raster<int>(target.width, target.height, 0);
    parallel_for(static_cast<std::size_t>(target.height), threads, [&](std::size_t y0, std::size_t y1, int) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y)
            for (int x = 0; x < target.width; ++x) {
                const auto hit = scaffold.raycast(pixel_center_ray(target, x, y));
                if (!hit) continue;
                int count = 0;
                for (std::size_t c = 0; c < training_cameras.size(); ++c)
                    if (visibility_test(hit->point, training_cameras[c], training_dmaps[c], eps)) ++count;
                cov.values(x, y) = count;
            }
    });
    return cov;
}

}  // namespace nerfvs
