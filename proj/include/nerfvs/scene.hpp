// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nerfvs/bvh.hpp"
#include "nerfvs/camera.hpp"
#include "nerfvs/errors.hpp"
#include "nerfvs/parallel.hpp"
#include "nerfvs/raster.hpp"

namespace nerfvs {

/// Two-tone checkerboard albedo. A scale of zero gives a flat albedo.
struct Material {
    Vec3 albedo{0.7, 0.7, 0.7};
    Vec3 albedo_alt{0.7, 0.7, 0.7};
    Real checker_scale = 0;
};

struct ObjectSpec {
    enum class Kind { Box, Sphere } kind = Kind::Box;
    Vec3 center;
    Vec3 half_extents{0.1, 0.1, 0.1};  // boxes
    Real radius = 0.1;                 // spheres
    Material material;
};

struct TrajectorySpec {
    int width = 64;
    int height = 64;
    Real fov_x_deg = 70;
    int n_train = 20;
    Real focus_fraction = 0.8;  // share of training views on the orbit around the focus
    Vec3 focus{0, 0, 0};
    Real orbit_radius = 0.5;
    Real orbit_height = 0.3;       // above the focus
    Real orbit_arc_deg = 140;      // angular span of the orbit
    Real orbit_start_deg = -70;    // azimuth of the first orbit camera around +z
    Vec3 sweep_center{0, 0, 0};
    Real sweep_pitch_deg = -10;
    std::array<int, 3> extrap_grid{2, 1, 2};
    Vec3 extrap_lo{-0.4, 0, -0.4};
    Vec3 extrap_hi{0.4, 0, 0.4};
    int extrap_directions = 8;
    Real extrap_pitch_deg = -15;
};

struct SceneSpec {
    Vec3 room_half_extents{0.9, 0.6, 0.9};
    Material wall_material;
    Material floor_material;
    Material ceiling_material;
    std::vector<ObjectSpec> objects;
    Vec3 light_direction{0.4, 0.8, 0.45};
    Real ambient = 0.2;
    Real specular = 0;  // >0 enables a view-dependent highlight term
    Real shininess = 16;
    std::uint64_t seed = 0;
    TrajectorySpec trajectory;
};

/// Per-triangle 2D parametrization used by the checkerboard.
struct FaceFrame {
    bool spherical = false;
    Vec3 origin;  // face corner, or sphere center
    Vec3 u_axis, v_axis;
    Real radius = 0;
};

/// Triangulated scene with shading attributes and a BVH.
class Scene {
public:
    Scene() = default;
    Scene(TriangleMesh mesh, std::vector<int> material_of, std::vector<Material> materials,
          std::vector<FaceFrame> frames, Vec3 light, Real ambient, Real specular, Real shininess)
        : scaffold_(std::move(mesh)),
          material_of_(std::move(material_of)),
          materials_(std::move(materials)),
          frames_(std::move(frames)),
          light_(normalize(light)),
          ambient_(ambient),
          specular_(specular),
          shininess_(shininess) {}

    const TriangleMesh& mesh() const { return scaffold_.mesh; }
    const Scaffold& scaffold() const { return scaffold_; }

    Vec3 albedo_at(int tri, const Vec3& p) const {
        const Material& m = materials_[material_of_[tri]];
        if (m.checker_scale <= 0) return m.albedo;
        const FaceFrame& f = frames_[tri];
        Real u, v;
        if (f.spherical) {
            const Vec3 d = normalize(p - f.origin);
            u = std::atan2(d.z, d.x) * f.radius;
            v = std::acos(std::clamp(d.y, Real(-1), Real(1))) * f.radius;
        } else {
            u = dot(p - f.origin, f.u_axis);
            v = dot(p - f.origin, f.v_axis);
        }
        const long cu = static_cast<long>(std::floor(u / m.checker_scale + 1e-9));
        const long cv = static_cast<long>(std::floor(v / m.checker_scale + 1e-9));
        return ((cu + cv) & 1) ? m.albedo_alt : m.albedo;
    }

    Vec3 shade(const Hit& hit, const Vec3& view_dir) const {
        const Vec3 n = scaffold_.mesh.normal(hit.triangle_id);
        const Real lambert = std::max(Real(0), dot(n, light_));
        Vec3 c = albedo_at(hit.triangle_id, hit.point) * lambert + Vec3{ambient_, ambient_, ambient_};
        if (specular_ > 0) {
            const Vec3 refl = n * (2 * dot(n, light_)) - light_;
            const Real s = std::pow(std::max(Real(0), dot(refl, -view_dir)), shininess_);
            c += Vec3{1, 1, 1} * (specular_ * s * (lambert > 0 ? 1.0 : 0.0));
        }
        return {std::clamp(c.x, Real(0), Real(1)), std::clamp(c.y, Real(0), Real(1)), std::clamp(c.z, Real(0), Real(1))};
    }

private:
    Scaffold scaffold_;
    std::vector<int> material_of_;
    std::vector<Material> materials_;
    std::vector<FaceFrame> frames_;
    Vec3 light_{0, 1, 0};
    Real ambient_ = 0.2;
    Real specular_ = 0;
    Real shininess_ = 16;
};

namespace detail {

struct MeshBuilder {
    TriangleMesh mesh;
    std::vector<int> material_of;
    std::vector<Material> materials;
    std::vector<FaceFrame> frames;

    int add_material(const Material& m) {
        materials.push_back(m);
        return static_cast<int>(materials.size()) - 1;
    }

    void add_triangle(int a, int b, int c, int group, int material, const FaceFrame& frame) {
        mesh.triangles.push_back({a, b, c});
        mesh.groups.push_back(group);
        material_of.push_back(material);
        frames.push_back(frame);
    }

    /// Axis-aligned box; normals point outward, or inward for the room shell.
    /// Corner vertices are shared, so the shell is closed.
    void add_box(const Vec3& c, const Vec3& h, bool inward, int group, const std::array<int, 6>& face_material) {
        const int base = static_cast<int>(mesh.vertices.size());
        for (int i = 0; i < 8; ++i)
            mesh.vertices.push_back({c.x + ((i & 1) ? h.x : -h.x), c.y + ((i & 2) ? h.y : -h.y),
                                     c.z + ((i & 4) ? h.z : -h.z)});
        // Faces as corner bit patterns listed counter-clockwise seen from outside:
        // -x, +x, -y, +y, -z, +z.
        static constexpr int faces[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                                            {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
        for (int f = 0; f < 6; ++f) {
            int q[4];
            for (int k = 0; k < 4; ++k) q[k] = base + faces[f][k];
            if (inward) std::swap(q[1], q[3]);
            FaceFrame fr;
            fr.origin = mesh.vertices[q[0]];
            fr.u_axis = normalize(mesh.vertices[q[1]] - fr.origin);
            fr.v_axis = normalize(mesh.vertices[q[3]] - fr.origin);
            add_triangle(q[0], q[1], q[2], group, face_material[f], fr);
            add_triangle(q[0], q[2], q[3], group, face_material[f], fr);
        }
    }

    void add_sphere(const Vec3& c, Real r, int group, int material, int slices = 16, int stacks = 8) {
        const int base = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(c + Vec3{0, r, 0});
        for (int i = 1; i < stacks; ++i) {
            const Real theta = std::numbers::pi * i / stacks;
            for (int j = 0; j < slices; ++j) {
                const Real phi = 2 * std::numbers::pi * j / slices;
                mesh.vertices.push_back(c + Vec3{r * std::sin(theta) * std::cos(phi), r * std::cos(theta),
                                                 r * std::sin(theta) * std::sin(phi)});
            }
        }
        mesh.vertices.push_back(c - Vec3{0, r, 0});
        const int bottom = static_cast<int>(mesh.vertices.size()) - 1;
        auto ring = [&](int i, int j) { return base + 1 + (i - 1) * slices + (j % slices); };
        FaceFrame fr;
        fr.spherical = true;
        fr.origin = c;
        fr.radius = r;
        for (int j = 0; j < slices; ++j) add_triangle(base, ring(1, j + 1), ring(1, j), group, material, fr);
        for (int i = 1; i + 1 < stacks; ++i)
            for (int j = 0; j < slices; ++j) {
                add_triangle(ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), group, material, fr);
                add_triangle(ring(i, j), ring(i + 1, j + 1), ring(i + 1, j), group, material, fr);
            }
        for (int j = 0; j < slices; ++j) add_triangle(bottom, ring(stacks - 1, j), ring(stacks - 1, j + 1), group, material, fr);
    }
};

inline bool inside_box(const Vec3& lo, const Vec3& hi, const Vec3& p) {
    return p.x >= lo.x && p.y >= lo.y && p.z >= lo.z && p.x <= hi.x && p.y <= hi.y && p.z <= hi.z;
}

}  // namespace detail

/// Room shell (group 0, inward normals) plus one group per object (1, 2, ...).
inline Scene build_scene(const SceneSpec& spec) {
    const Vec3 h = spec.room_half_extents;
    if (!(h.x > 0 && h.y > 0 && h.z > 0) || h.x > 1 || h.y > 1 || h.z > 1)
        throw ConfigError("room must have positive extents inside [-1, 1]^3");
    detail::MeshBuilder b;
    const int wall = b.add_material(spec.wall_material);
    const int floor = b.add_material(spec.floor_material);
    const int ceiling = b.add_material(spec.ceiling_material);
    b.add_box({0, 0, 0}, h, true, 0, {wall, wall, floor, ceiling, wall, wall});
    const Vec3 lo = -h, hi = h;
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const auto& o = spec.objects[i];
        const int group = static_cast<int>(i) + 1;
        const int mat = b.add_material(o.material);
        if (o.kind == ObjectSpec::Kind::Box) {
            if (!detail::inside_box(lo, hi, o.center - o.half_extents) || !detail::inside_box(lo, hi, o.center + o.half_extents))
                throw ConfigError("object " + std::to_string(i) + " extends outside the room");
            b.add_box(o.center, o.half_extents, false, group, {mat, mat, mat, mat, mat, mat});
        } else {
            const Vec3 r{o.radius, o.radius, o.radius};
            if (!(o.radius > 0) || !detail::inside_box(lo, hi, o.center - r) || !detail::inside_box(lo, hi, o.center + r))
                throw ConfigError("object " + std::to_string(i) + " extends outside the room");
            b.add_sphere(o.center, o.radius, group, mat);
        }
    }
    b.mesh.validate();
    return Scene(std::move(b.mesh), std::move(b.material_of), std::move(b.materials), std::move(b.frames),
                 spec.light_direction, spec.ambient, spec.specular, spec.shininess);
}

/// One primary ray per pixel center, shaded at the nearest hit, black on miss.
inline Image render_gt(const Scene& scene, const CameraModel& cam, int threads = 1) {
    Image img(cam.width, cam.height);
    parallel_for(static_cast<std::size_t>(cam.height), threads, [&](std::size_t y0, std::size_t y1, int) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y)
            for (int x = 0; x < cam.width; ++x) {
                const Ray ray = pixel_center_ray(cam, x, y);
                if (const auto hit = scene.scaffold().raycast(ray)) img.set_pixel(x, y, scene.shade(*hit, ray.direction));
            }
    });
    return img;
}

/// Rounds every channel to the nearest 8-bit level, matching what a PPM
/// round trip yields.
inline Image quantize8(Image img) {
    for (auto& v : img.data) v = to_byte(v) / 255.0;
    return img;
}

// --- camera trajectories -------------------------------------------------

struct Quat {
    Real w = 1, x = 0, y = 0, z = 0;
};

inline Quat quat_from_matrix(const Mat3& m) {
    Quat q;
    const Real tr = m(0, 0) + m(1, 1) + m(2, 2);
    if (tr > 0) {
        const Real s = std::sqrt(tr + 1.0) * 2;
        q.w = 0.25 * s;
        q.x = (m(2, 1) - m(1, 2)) / s;
        q.y = (m(0, 2) - m(2, 0)) / s;
        q.z = (m(1, 0) - m(0, 1)) / s;
    } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
        const Real s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2;
        q.w = (m(2, 1) - m(1, 2)) / s;
        q.x = 0.25 * s;
        q.y = (m(0, 1) + m(1, 0)) / s;
        q.z = (m(0, 2) + m(2, 0)) / s;
    } else if (m(1, 1) > m(2, 2)) {
        const Real s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2;
        q.w = (m(0, 2) - m(2, 0)) / s;
        q.x = (m(0, 1) + m(1, 0)) / s;
        q.y = 0.25 * s;
        q.z = (m(1, 2) + m(2, 1)) / s;
    } else {
        const Real s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2;
        q.w = (m(1, 0) - m(0, 1)) / s;
        q.x = (m(0, 2) + m(2, 0)) / s;
        q.y = (m(1, 2) + m(2, 1)) / s;
        q.z = 0.25 * s;
    }
    return q;
}

inline Mat3 matrix_from_quat(Quat q) {
    const Real n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
    q.w /= n;
    q.x /= n;
    q.y /= n;
    q.z /= n;
    Mat3 m;
    m(0, 0) = 1 - 2 * (q.y * q.y + q.z * q.z);
    m(0, 1) = 2 * (q.x * q.y - q.z * q.w);
    m(0, 2) = 2 * (q.x * q.z + q.y * q.w);
    m(1, 0) = 2 * (q.x * q.y + q.z * q.w);
    m(1, 1) = 1 - 2 * (q.x * q.x + q.z * q.z);
    m(1, 2) = 2 * (q.y * q.z - q.x * q.w);
    m(2, 0) = 2 * (q.x * q.z - q.y * q.w);
    m(2, 1) = 2 * (q.y * q.z + q.x * q.w);
    m(2, 2) = 1 - 2 * (q.x * q.x + q.y * q.y);
    return m;
}

inline Quat slerp(Quat a, Quat b, Real t) {
    Real d = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
    if (d < 0) {
        b = {-b.w, -b.x, -b.y, -b.z};
        d = -d;
    }
    if (d > 0.9995) {
        return {a.w + t * (b.w - a.w), a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
    }
    const Real theta = std::acos(d);
    const Real sa = std::sin((1 - t) * theta) / std::sin(theta);
    const Real sb = std::sin(t * theta) / std::sin(theta);
    return {sa * a.w + sb * b.w, sa * a.x + sb * b.x, sa * a.y + sb * b.y, sa * a.z + sb * b.z};
}

/// Pose midpoint: position lerp and rotation slerp, same intrinsics as `a`.
inline CameraModel interpolate_camera(const CameraModel& a, const CameraModel& b, Real t = 0.5) {
    CameraModel c = a;
    c.position = a.position * (1 - t) + b.position * t;
    c.rotation = matrix_from_quat(slerp(quat_from_matrix(a.rotation), quat_from_matrix(b.rotation), t));
    return c;
}

inline Vec3 direction_from_angles(Real yaw, Real pitch) {
    return {std::cos(pitch) * std::sin(yaw), std::sin(pitch), -std::cos(pitch) * std::cos(yaw)};
}

struct CameraSplits {
    std::vector<CameraModel> train;
    std::vector<CameraModel> interp;
    std::vector<CameraModel> extrap;
};

/// Training cameras orbit `focus` for the focus share of views and sweep
/// the remaining walls from `sweep_center` for the rest. Interpolation
/// cameras sit between consecutive training cameras; extrapolation cameras
/// form a position grid with evenly spread yaw directions.
inline CameraSplits make_trajectory(const TrajectorySpec& t) {
    if (t.n_train < 4) throw ConfigError("at least four training views are required");
    const Real fov = t.fov_x_deg * std::numbers::pi / 180;
    const Vec3 up{0, 1, 0};
    CameraSplits s;
    const int n_focus = std::clamp(static_cast<int>(std::lround(t.focus_fraction * t.n_train)), 1, t.n_train - 1);
    const int n_sweep = t.n_train - n_focus;
    for (int i = 0; i < n_focus; ++i) {
        const Real frac = n_focus > 1 ? static_cast<Real>(i) / (n_focus - 1) : 0.5;
        const Real az = (t.orbit_start_deg + frac * t.orbit_arc_deg) * std::numbers::pi / 180;
        const Vec3 eye = t.focus + Vec3{t.orbit_radius * std::sin(az), t.orbit_height, t.orbit_radius * std::cos(az)};
        s.train.push_back(CameraModel::look_at(eye, t.focus, up, t.width, t.height, fov));
    }
    const Real pitch = t.sweep_pitch_deg * std::numbers::pi / 180;
    for (int i = 0; i < n_sweep; ++i) {
        const Real yaw = 2 * std::numbers::pi * (i + 0.5) / n_sweep;
        s.train.push_back(
            CameraModel::look_at(t.sweep_center, t.sweep_center + direction_from_angles(yaw, pitch), up, t.width, t.height, fov));
    }
    for (std::size_t i = 0; i + 1 < s.train.size(); ++i) s.interp.push_back(interpolate_camera(s.train[i], s.train[i + 1]));
    const Real epitch = t.extrap_pitch_deg * std::numbers::pi / 180;
    for (int gx = 0; gx < t.extrap_grid[0]; ++gx)
        for (int gy = 0; gy < t.extrap_grid[1]; ++gy)
            for (int gz = 0; gz < t.extrap_grid[2]; ++gz) {
                auto lerp_axis = [](Real lo, Real hi, int i, int n) { return n > 1 ? lo + (hi - lo) * i / (n - 1) : 0.5 * (lo + hi); };
                const Vec3 eye{lerp_axis(t.extrap_lo.x, t.extrap_hi.x, gx, t.extrap_grid[0]),
                               lerp_axis(t.extrap_lo.y, t.extrap_hi.y, gy, t.extrap_grid[1]),
                               lerp_axis(t.extrap_lo.z, t.extrap_hi.z, gz, t.extrap_grid[2])};
                for (int k = 0; k < t.extrap_directions; ++k) {
                    const Real yaw = 2 * std::numbers::pi * k / t.extrap_directions;
                    s.extrap.push_back(
                        CameraModel::look_at(eye, eye + direction_from_angles(yaw, epitch), up, t.width, t.height, fov));
                }
            }
    return s;
}

// --- scaffold corruption ---------------------------------------------------

enum class PerturbMode { VertexNoise, DeleteRandomFaces, OffsetObject };

inline PerturbMode parse_perturb_mode(const std::string& s) {
    if (s == "vertex-noise") return PerturbMode::VertexNoise;
    if (s == "delete-random-faces") return PerturbMode::DeleteRandomFaces;
    if (s == "offset-object") return PerturbMode::OffsetObject;
    throw ConfigError("unknown perturbation mode '" + s + "'");
}

/// Controlled scaffold corruption. vertex-noise adds N(0, magnitude^2) per
/// coordinate; delete-random-faces drops floor(magnitude * T) triangles;
/// offset-object translates one object group (chosen from the seed unless
/// `object_group` > 0) by `magnitude` along a seeded horizontal direction.
inline TriangleMesh perturb_scaffold(const TriangleMesh& mesh, PerturbMode mode, Real magnitude, std::uint64_t seed,
                                     int object_group = 0) {
    if (magnitude < 0) throw ConfigError("perturbation magnitude must be nonnegative");
    TriangleMesh out = mesh;
    std::mt19937_64 rng(seed);
    switch (mode) {
        case PerturbMode::VertexNoise: {
            if (magnitude == 0) break;
            std::normal_distribution<Real> n(0.0, magnitude);
            for (auto& v : out.vertices) v += Vec3{n(rng), n(rng), n(rng)};
            break;
        }
        case PerturbMode::DeleteRandomFaces: {
            const std::size_t remove = static_cast<std::size_t>(std::floor(magnitude * mesh.size()));
            if (remove >= mesh.size()) throw ConfigError("deletion would remove every triangle");
            std::vector<std::size_t> idx(mesh.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), rng);
            std::vector<char> drop(mesh.size(), 0);
            for (std::size_t i = 0; i < remove; ++i) drop[idx[i]] = 1;
            out.triangles.clear();
            out.groups.clear();
            for (std::size_t t = 0; t < mesh.size(); ++t) {
                if (drop[t]) continue;
                out.triangles.push_back(mesh.triangles[t]);
                if (!mesh.groups.empty()) out.groups.push_back(mesh.groups[t]);
            }
            break;
        }
        case PerturbMode::OffsetObject: {
            int max_group = 0;
            for (int g : mesh.groups) max_group = std::max(max_group, g);
            if (max_group == 0) throw ConfigError("offset-object needs a mesh with object groups");
            int group = object_group;
            if (group <= 0) group = std::uniform_int_distribution<int>(1, max_group)(rng);
            const Real az = std::uniform_real_distribution<Real>(0, 2 * std::numbers::pi)(rng);
            if (magnitude == 0) break;
            const Vec3 shift = Vec3{std::cos(az), 0, std::sin(az)} * magnitude;
            std::vector<char> moved(mesh.vertices.size(), 0);
            for (std::size_t t = 0; t < mesh.size(); ++t)
                if (mesh.groups[t] == group)
                    for (int k = 0; k < 3; ++k) moved[mesh.triangles[t][k]] = 1;
            for (std::size_t v = 0; v < moved.size(); ++v)
                if (moved[v]) out.vertices[v] += shift;
            break;
        }
    }
    out.validate();
    return out;
}

// --- JSON -----------------------------------------------------------------

inline nlohmann::json vec_to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

inline Vec3 vec_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw DataError("expected a 3-vector");
    return {j[0].get<Real>(), j[1].get<Real>(), j[2].get<Real>()};
}

inline nlohmann::json material_to_json(const Material& m) {
    return {{"albedo", vec_to_json(m.albedo)}, {"albedo_alt", vec_to_json(m.albedo_alt)}, {"checker_scale", m.checker_scale}};
}

inline Material material_from_json(const nlohmann::json& j) {
    Material m;
    m.albedo = vec_from_json(j.at("albedo"));
    m.albedo_alt = j.contains("albedo_alt") ? vec_from_json(j.at("albedo_alt")) : m.albedo;
    m.checker_scale = j.value("checker_scale", 0.0);
    return m;
}

inline nlohmann::json scene_spec_to_json(const SceneSpec& s) {
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& o : s.objects) {
        nlohmann::json jo{{"kind", o.kind == ObjectSpec::Kind::Box ? "box" : "sphere"},
                          {"center", vec_to_json(o.center)},
                          {"material", material_to_json(o.material)}};
        if (o.kind == ObjectSpec::Kind::Box)
            jo["half_extents"] = vec_to_json(o.half_extents);
        else
            jo["radius"] = o.radius;
        objects.push_back(jo);
    }
    const auto& t = s.trajectory;
    nlohmann::json traj{{"width", t.width},
                        {"height", t.height},
                        {"fov_x_deg", t.fov_x_deg},
                        {"n_train", t.n_train},
                        {"focus_fraction", t.focus_fraction},
                        {"focus", vec_to_json(t.focus)},
                        {"orbit_radius", t.orbit_radius},
                        {"orbit_height", t.orbit_height},
                        {"orbit_arc_deg", t.orbit_arc_deg},
                        {"orbit_start_deg", t.orbit_start_deg},
                        {"sweep_center", vec_to_json(t.sweep_center)},
                        {"sweep_pitch_deg", t.sweep_pitch_deg},
                        {"extrap_grid", t.extrap_grid},
                        {"extrap_lo", vec_to_json(t.extrap_lo)},
                        {"extrap_hi", vec_to_json(t.extrap_hi)},
                        {"extrap_directions", t.extrap_directions},
                        {"extrap_pitch_deg", t.extrap_pitch_deg}};
    return {{"room_half_extents", vec_to_json(s.room_half_extents)},
            {"wall_material", material_to_json(s.wall_material)},
            {"floor_material", material_to_json(s.floor_material)},
            {"ceiling_material", material_to_json(s.ceiling_material)},
            {"objects", objects},
            {"light_direction", vec_to_json(s.light_direction)},
            {"ambient", s.ambient},
            {"specular", s.specular},
            {"shininess", s.shininess},
            {"seed", s.seed},
            {"trajectory", traj}};
}

inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
    try {
        SceneSpec s;
        if (j.contains("room_half_extents")) s.room_half_extents = vec_from_json(j["room_half_extents"]);
        if (j.contains("wall_material")) s.wall_material = material_from_json(j["wall_material"]);
        if (j.contains("floor_material")) s.floor_material = material_from_json(j["floor_material"]);
        if (j.contains("ceiling_material")) s.ceiling_material = material_from_json(j["ceiling_material"]);
        if (j.contains("objects"))
            for (const auto& jo : j["objects"]) {
                ObjectSpec o;
                const std::string kind = jo.value("kind", "box");
                if (kind == "box")
                    o.kind = ObjectSpec::Kind::Box;
                else if (kind == "sphere")
                    o.kind = ObjectSpec::Kind::Sphere;
                else
                    throw DataError("unknown object kind '" + kind + "'");
                o.center = vec_from_json(jo.at("center"));
                if (jo.contains("half_extents")) o.half_extents = vec_from_json(jo["half_extents"]);
                o.radius = jo.value("radius", o.radius);
                if (jo.contains("material")) o.material = material_from_json(jo["material"]);
                s.objects.push_back(o);
            }
        if (j.contains("light_direction")) s.light_direction = vec_from_json(j["light_direction"]);
        s.ambient = j.value("ambient", s.ambient);
        s.specular = j.value("specular", s.specular);
        s.shininess = j.value("shininess", s.shininess);
        s.seed = j.value("seed", s.seed);
        if (j.contains("trajectory")) {
            const auto& jt = j["trajectory"];
            auto& t = s.trajectory;
            t.width = jt.value("width", t.width);
            t.height = jt.value("height", t.height);
            t.fov_x_deg = jt.value("fov_x_deg", t.fov_x_deg);
            t.n_train = jt.value("n_train", t.n_train);
            t.focus_fraction = jt.value("focus_fraction", t.focus_fraction);
            if (jt.contains("focus")) t.focus = vec_from_json(jt["focus"]);
            t.orbit_radius = jt.value("orbit_radius", t.orbit_radius);
            t.orbit_height = jt.value("orbit_height", t.orbit_height);
            t.orbit_arc_deg = jt.value("orbit_arc_deg", t.orbit_arc_deg);
            t.orbit_start_deg = jt.value("orbit_start_deg", t.orbit_start_deg);
            if (jt.contains("sweep_center")) t.sweep_center = vec_from_json(jt["sweep_center"]);
            t.sweep_pitch_deg = jt.value("sweep_pitch_deg", t.sweep_pitch_deg);
            if (jt.contains("extrap_grid")) t.extrap_grid = jt["extrap_grid"].get<std::array<int, 3>>();
            if (jt.contains("extrap_lo")) t.extrap_lo = vec_from_json(jt["extrap_lo"]);
            if (jt.contains("extrap_hi")) t.extrap_hi = vec_from_json(jt["extrap_hi"]);
            t.extrap_directions = jt.value("extrap_directions", t.extrap_directions);
            t.extrap_pitch_deg = jt.value("extrap_pitch_deg", t.extrap_pitch_deg);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid scene spec: ") + e.what());
    }
}

/// Furnished room with a textured table as the capture focus and plain,
/// low-texture walls and ceiling.
inline SceneSpec default_scene_spec(int image_size = 64, int n_train = 20) {
    SceneSpec s;
    s.room_half_extents = {0.9, 0.6, 0.9};
    s.wall_material = {{0.72, 0.68, 0.6}, {0.72, 0.68, 0.6}, 0};
    s.ceiling_material = {{0.85, 0.85, 0.85}, {0.85, 0.85, 0.85}, 0};
    s.floor_material = {{0.55, 0.45, 0.35}, {0.45, 0.36, 0.28}, 0.3};
    ObjectSpec table;
    table.center = {0.2, -0.45, 0.1};
    table.half_extents = {0.28, 0.15, 0.2};
    table.material = {{0.8, 0.55, 0.3}, {0.35, 0.2, 0.1}, 0.06};
    ObjectSpec cube;
    cube.center = {0.28, -0.21, 0.05};
    cube.half_extents = {0.07, 0.09, 0.07};
    cube.material = {{0.9, 0.2, 0.15}, {0.95, 0.95, 0.9}, 0.045};
    ObjectSpec cabinet;
    cabinet.center = {-0.68, -0.3, -0.55};
    cabinet.half_extents = {0.16, 0.3, 0.24};
    cabinet.material = {{0.2, 0.35, 0.75}, {0.6, 0.7, 0.9}, 0.1};
    ObjectSpec lamp;
    lamp.kind = ObjectSpec::Kind::Sphere;
    lamp.center = {-0.3, 0.32, 0.45};
    lamp.radius = 0.12;
    lamp.material = {{0.95, 0.85, 0.2}, {0.6, 0.4, 0.1}, 0.06};
    s.objects = {table, cube, cabinet, lamp};
    s.light_direction = {0.4, 0.8, 0.45};
    auto& t = s.trajectory;
    t.width = t.height = image_size;
    t.n_train = n_train;
    t.focus = {0.2, -0.3, 0.1};
    t.orbit_radius = 0.4;
    t.orbit_height = 0.7;
    t.orbit_arc_deg = 140;
    t.orbit_start_deg = -70;
    t.sweep_center = {-0.1, 0.05, -0.1};
    t.extrap_grid = {2, 1, 2};
    t.extrap_lo = {-0.45, 0.0, -0.35};
    t.extrap_hi = {0.35, 0.0, 0.45};
    return s;
}

}  // namespace nerfvs
