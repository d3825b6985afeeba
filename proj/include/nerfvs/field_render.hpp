// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "nerfvs/parallel.hpp"
#include "nerfvs/raster.hpp"
#include "nerfvs/renderer.hpp"

namespace nerfvs {

inline constexpr Real kDefaultNear = 0.05;

/// Ray through the pixel center of (x, y), bounded by `near` and the exit
/// from the [-1, 1]^3 scene cube. Returns false when nothing of the cube
/// lies beyond `near`.
inline bool scene_ray(const CameraModel& cam, Real px, Real py, Real near, Ray& out) {
    out = pixel_to_ray(cam, px, py);
    const auto [t0, t1] = ray_box_interval(out, {-1, -1, -1}, {1, 1, 1});
    out.t_near = std::max(near, t0);
    out.t_far = t1;
    return out.t_far > out.t_near;
}

/// Renders `grid` through every pixel of `cam` with deterministic midpoint
/// sampling.
struct RenderedView {
    Image color;
    Raster<Real> depth;
    Raster<Real> opacity;
};

inline RenderedView render_view(const VoxelGrid& grid, const CameraModel& cam, int n_samples,
                                Real near = kDefaultNear, int threads = 1) {
    RenderedView out{Image(cam.width, cam.height), Raster<Real>(cam.width, cam.height, 0.0),
                     Raster<Real>(cam.width, cam.height, 0.0)};
    parallel_for(static_cast<std::size_t>(cam.height), threads, [&](std::size_t y0, std::size_t y1, int) {
        RaySamples samples;
        std::vector<FieldSample> field;
        RayRenderResult result;
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y)
            for (int x = 0; x < cam.width; ++x) {
                Ray ray;
                if (!scene_ray(cam, x + 0.5, y + 0.5, near, ray)) continue;
                sample_ray_into(ray, n_samples, static_cast<std::mt19937_64*>(nullptr), samples);
                field.resize(samples.size());
                for (std::size_t i = 0; i < samples.size(); ++i) field[i] = eval_field(grid, samples.points[i], ray.direction);
                composite_into(samples, field, result);
                out.color.set_pixel(x, y, result.color);
                out.depth(x, y) = result.depth;
                out.opacity(x, y) = result.opacity;
            }
    });
    return out;
}

}  // namespace nerfvs
