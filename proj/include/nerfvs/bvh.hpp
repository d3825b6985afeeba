// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "nerfvs/camera.hpp"
#include "nerfvs/errors.hpp"
#include "nerfvs/mesh.hpp"

namespace nerfvs {

/// Hits closer than this are discarded so that rays leaving a surface do
/// not report the surface they start on.
inline constexpr Real kMinHitDistance = 1e-6;

/// Moller-Trumbore intersection with inclusive edges. Returns the ray
/// parameter of the crossing when it lies in [max(t_near, 1e-6), t_far].
inline std::optional<Real> ray_triangle_intersect(const Ray& ray, const Vec3& v0, const Vec3& v1,
                                                  const Vec3& v2) {
    const Vec3 e1 = v1 - v0;
    const Vec3 e2 = v2 - v0;
    const Vec3 p = cross(ray.direction, e2);
    const Real det = dot(e1, p);
    if (std::abs(det) < 1e-14) return std::nullopt;
    const Real inv = 1.0 / det;
    const Vec3 s = ray.origin - v0;
    const Real u = dot(s, p) * inv;
    if (u < 0 || u > 1) return std::nullopt;
    const Vec3 q = cross(s, e1);
    const Real v = dot(ray.direction, q) * inv;
    if (v < 0 || u + v > 1) return std::nullopt;
    const Real t = dot(e2, q) * inv;
    if (t < std::max(ray.t_near, kMinHitDistance) || t > ray.t_far) return std::nullopt;
    return t;
}

struct Hit {
    Real t = 0;
    int triangle_id = -1;
    Vec3 point;
};

/// Nearest-first ordering with ties broken by triangle index.
inline bool closer(Real t, int id, const Hit& best) {
    return t < best.t || (t == best.t && id < best.triangle_id);
}

struct Aabb {
    Vec3 lo{std::numeric_limits<Real>::infinity(), std::numeric_limits<Real>::infinity(),
            std::numeric_limits<Real>::infinity()};
    Vec3 hi{-std::numeric_limits<Real>::infinity(), -std::numeric_limits<Real>::infinity(),
            -std::numeric_limits<Real>::infinity()};

    void expand(const Vec3& p) {
        lo = vmin(lo, p);
        hi = vmax(hi, p);
    }
    void expand(const Aabb& b) {
        lo = vmin(lo, b.lo);
        hi = vmax(hi, b.hi);
    }
    bool contains(const Vec3& p, Real slack = 0) const {
        for (int a = 0; a < 3; ++a)
            if (p[a] < lo[a] - slack || p[a] > hi[a] + slack) return false;
        return true;
    }
    Vec3 extent() const { return hi - lo; }
    int longest_axis() const {
        const Vec3 e = extent();
        return (e.x >= e.y && e.x >= e.z) ? 0 : (e.y >= e.z ? 1 : 2);
    }
};

struct BvhNode {
    Aabb box;
    // Interior: children at `first` and `first + 1`, count == 0.
    // Leaf: triangles order[first .. first + count).
    int first = 0;
    int count = 0;
    bool is_leaf() const { return count > 0; }
};

/// Median-split bounding volume hierarchy over triangle centroids.
class Bvh {
public:
    static constexpr int kMaxLeafSize = 4;

    Bvh() = default;

    explicit Bvh(const TriangleMesh& mesh) {
        if (mesh.empty()) throw DataError("cannot build a BVH over an empty mesh");
        const int n = static_cast<int>(mesh.size());
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        tri_boxes_.resize(n);
        centroids_.resize(n);
        for (int t = 0; t < n; ++t) {
            for (int k = 0; k < 3; ++k) tri_boxes_[t].expand(mesh.corner(t, k));
            centroids_[t] = (mesh.corner(t, 0) + mesh.corner(t, 1) + mesh.corner(t, 2)) / 3.0;
        }
        nodes_.reserve(2 * n);
        nodes_.emplace_back();
        build(0, 0, n, 0);
        tri_boxes_.clear();
        tri_boxes_.shrink_to_fit();
        centroids_.clear();
        centroids_.shrink_to_fit();
    }

    const std::vector<BvhNode>& nodes() const { return nodes_; }
    const std::vector<int>& order() const { return order_; }
    int depth() const { return depth_; }
    std::size_t triangle_count() const { return order_.size(); }

    /// Nearest hit along the ray; ties on t resolve to the smaller triangle id.
    std::optional<Hit> raycast(const TriangleMesh& mesh, const Ray& ray) const {
        if (nodes_.empty()) return std::nullopt;
        Hit best;
        best.t = std::numeric_limits<Real>::infinity();
        bool found = false;
        Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
        int stack[128];
        int sp = 0;
        stack[sp++] = 0;
        while (sp > 0) {
            const BvhNode& node = nodes_[stack[--sp]];
            Real limit = found ? best.t : ray.t_far;
            if (!slab_hit(node.box, ray, inv_dir, limit)) continue;
            if (node.is_leaf()) {
                for (int i = node.first; i < node.first + node.count; ++i) {
                    const int id = order_[i];
                    const auto& tri = mesh.triangles[id];
                    const auto t = ray_triangle_intersect(ray, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                                          mesh.vertices[tri[2]]);
                    if (t && (!found || closer(*t, id, best))) {
                        best.t = *t;
                        best.triangle_id = id;
                        found = true;
                    }
                }
            } else {
                stack[sp++] = node.first + 1;
                stack[sp++] = node.first;
            }
        }
        if (!found) return std::nullopt;
        best.point = ray.at(best.t);
        return best;
    }

private:
    static constexpr Real kBoxPad = 1e-9;

    static bool slab_hit(const Aabb& box, const Ray& ray, const Vec3& inv_dir, Real limit) {
        Real t0 = std::max(ray.t_near, kMinHitDistance);
        Real t1 = limit;
        for (int a = 0; a < 3; ++a) {
            Real ta = (box.lo[a] - ray.origin[a]) * inv_dir[a];
            Real tb = (box.hi[a] - ray.origin[a]) * inv_dir[a];
            if (ta > tb) std::swap(ta, tb);
            if (ta > t0) t0 = ta;
            if (tb < t1) t1 = tb;
            if (t0 > t1) return false;
        }
        return true;
    }

    void build(int node_index, int begin, int end, int depth) {
        depth_ = std::max(depth_, depth);
        Aabb box, cbox;
        for (int i = begin; i < end; ++i) {
            box.expand(tri_boxes_[order_[i]]);
            cbox.expand(centroids_[order_[i]]);
        }
        box.lo -= Vec3{kBoxPad, kBoxPad, kBoxPad};
        box.hi += Vec3{kBoxPad, kBoxPad, kBoxPad};
        nodes_[node_index].box = box;
        const int count = end - begin;
        if (count <= kMaxLeafSize) {
            nodes_[node_index].first = begin;
            nodes_[node_index].count = count;
            return;
        }
        const int axis = cbox.longest_axis();
        const int mid = begin + count / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) {
                             const Real ca = centroids_[a][axis], cb = centroids_[b][axis];
                             return ca < cb || (ca == cb && a < b);
                         });
        const int left = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_.emplace_back();
        nodes_[node_index].first = left;
        nodes_[node_index].count = 0;
        build(left, begin, mid, depth + 1);
        build(left + 1, mid, end, depth + 1);
    }

    std::vector<BvhNode> nodes_;
    std::vector<int> order_;
    std::vector<Aabb> tri_boxes_;
    std::vector<Vec3> centroids_;
    int depth_ = 0;
};

inline Bvh build_bvh(const TriangleMesh& mesh) { return Bvh(mesh); }

inline std::optional<Hit> raycast(const Bvh& bvh, const TriangleMesh& mesh, const Ray& ray) {
    return bvh.raycast(mesh, ray);
}

/// A mesh together with its acceleration structure.
struct Scaffold {
    TriangleMesh mesh;
    Bvh bvh;

    Scaffold() = default;
    explicit Scaffold(TriangleMesh m) : mesh(std::move(m)), bvh(mesh) {}

    std::optional<Hit> raycast(const Ray& ray) const { return bvh.raycast(mesh, ray); }
};

}  // namespace nerfvs
