// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nerfvs/errors.hpp"
#include "nerfvs/vec.hpp"

namespace nerfvs {

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
    Real t_near = 0;
    Real t_far = std::numeric_limits<Real>::infinity();

    Vec3 at(Real t) const { return origin + direction * t; }
};

/// Pinhole camera. Camera frame is right-handed: +x right, +y up, looking
/// down -z. Image rows grow downward, so +y in camera space maps to
/// decreasing pixel row. Integer pixel i covers [i, i+1) and is sampled at
/// its center i + 0.5.
struct CameraModel {
    Real fx = 1, fy = 1, cx = 0, cy = 0;
    int width = 1, height = 1;
    Mat3 rotation;  // camera-to-world rotation; columns are the camera axes
    Vec3 position;  // camera center in world space

    Vec3 right() const { return rotation.column(0); }
    Vec3 up() const { return rotation.column(1); }
    Vec3 forward() const { return -rotation.column(2); }

    /// Rigid 4x4 camera-to-world transform, row-major.
    std::array<Real, 16> cam_to_world() const {
        std::array<Real, 16> m{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) m[r * 4 + c] = rotation(r, c);
            m[r * 4 + 3] = position[r];
        }
        m[15] = 1;
        return m;
    }

    /// Throws ConfigError when the intrinsics are not invertible or the
    /// rotation block is not a proper rotation.
    void validate() const {
        if (!(fx > 0) || !(fy > 0) || !std::isfinite(fx) || !std::isfinite(fy))
            throw ConfigError("camera focal lengths must be positive and finite");
        if (width <= 0 || height <= 0) throw ConfigError("camera image size must be positive");
        const Mat3 rtr = rotation.transposed() * rotation;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) > 1e-9)
                    throw ConfigError("camera rotation is not orthonormal");
        if (std::abs(rotation.det() - 1.0) > 1e-9)
            throw ConfigError("camera rotation must have determinant +1");
        if (!is_finite(position)) throw ConfigError("camera position must be finite");
    }

    static CameraModel from_matrix(Real fx, Real fy, Real cx, Real cy, int width, int height,
                                   const std::array<Real, 16>& cam_to_world) {
        CameraModel cam;
        cam.fx = fx;
        cam.fy = fy;
        cam.cx = cx;
        cam.cy = cy;
        cam.width = width;
        cam.height = height;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) cam.rotation(r, c) = cam_to_world[r * 4 + c];
            cam.position[r] = cam_to_world[r * 4 + 3];
        }
        cam.validate();
        return cam;
    }

    /// Camera at `eye` looking toward `target` with a horizontal field of
    /// view of `fov_x` radians and the principal point at the image center.
    static CameraModel look_at(const Vec3& eye, const Vec3& target, const Vec3& world_up, int width,
                               int height, Real fov_x) {
        const Vec3 f = normalize(target - eye);
        Vec3 x = cross(f, world_up);
        if (norm(x) < 1e-9) x = cross(f, Vec3{1, 0, 0});
        if (norm(x) < 1e-9) x = cross(f, Vec3{0, 0, 1});
        x = normalize(x);
        const Vec3 y = cross(x, f);
        CameraModel cam;
        cam.width = width;
        cam.height = height;
        cam.fx = cam.fy = 0.5 * width / std::tan(0.5 * fov_x);
        cam.cx = 0.5 * width;
        cam.cy = 0.5 * height;
        cam.rotation = Mat3::from_columns(x, y, -f);
        cam.position = eye;
        return cam;
    }
};

inline Ray pixel_to_ray(const CameraModel& cam, Real px, Real py) {
    if (!(cam.fx > 0) || !(cam.fy > 0)) throw ConfigError("non-invertible camera intrinsics");
    const Vec3 d_cam{(px - cam.cx) / cam.fx, -(py - cam.cy) / cam.fy, -1.0};
    Ray r;
    r.origin = cam.position;
    r.direction = normalize(cam.rotation * d_cam);
    r.t_near = 0;
    return r;
}

/// Ray through the center of integer pixel (i, j).
inline Ray pixel_center_ray(const CameraModel& cam, int i, int j) {
    return pixel_to_ray(cam, i + 0.5, j + 0.5);
}

struct Projection {
    Real px = 0, py = 0;
    Real dist = 0;
    bool in_front = false;

    bool in_frustum(const CameraModel& cam) const {
        return in_front && px >= 0 && py >= 0 && px < cam.width && py < cam.height;
    }
};

inline Projection project_point(const CameraModel& cam, const Vec3& p) {
    const Vec3 rel = p - cam.position;
    const Vec3 pc = cam.rotation.transposed() * rel;
    Projection out;
    out.dist = norm(rel);
    const Real depth = -pc.z;
    out.in_front = depth > 0;
    if (out.in_front) {
        out.px = cam.cx + cam.fx * pc.x / depth;
        out.py = cam.cy - cam.fy * pc.y / depth;
    }
    return out;
}

/// Parametric interval where the ray is inside the axis-aligned box; empty
/// (first > second) when the ray misses it.
inline std::pair<Real, Real> ray_box_interval(const Ray& r, const Vec3& lo, const Vec3& hi) {
    Real t0 = -std::numeric_limits<Real>::infinity();
    Real t1 = std::numeric_limits<Real>::infinity();
    for (int a = 0; a < 3; ++a) {
        const Real inv = 1.0 / r.direction[a];
        Real ta = (lo[a] - r.origin[a]) * inv;
        Real tb = (hi[a] - r.origin[a]) * inv;
        if (ta > tb) std::swap(ta, tb);
        // NaN from 0 * inf (origin on the slab plane) leaves the bounds untouched.
        if (ta > t0) t0 = ta;
        if (tb < t1) t1 = tb;
    }
    return {t0, t1};
}

}  // namespace nerfvs
