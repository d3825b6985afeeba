// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nerfvs/errors.hpp"
#include "nerfvs/vec.hpp"

namespace nerfvs {

using Triangle = std::array<int, 3>;

/// Indexed triangle mesh. `groups` is optional: when non-empty it holds one
/// object label per triangle (0 is the room shell for synthesized scenes).
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::vector<int> groups;

    std::size_t size() const { return triangles.size(); }
    bool empty() const { return triangles.empty(); }

    Vec3 corner(std::size_t tri, int k) const { return vertices[triangles[tri][k]]; }

    Real area(std::size_t tri) const {
        const Vec3 a = corner(tri, 0), b = corner(tri, 1), c = corner(tri, 2);
        return 0.5 * norm(cross(b - a, c - a));
    }

    /// Unit normal following the counter-clockwise winding.
    Vec3 normal(std::size_t tri) const {
        const Vec3 a = corner(tri, 0), b = corner(tri, 1), c = corner(tri, 2);
        return normalize(cross(b - a, c - a));
    }

    int group(std::size_t tri) const { return groups.empty() ? 0 : groups[tri]; }

    void validate() const {
        if (!groups.empty() && groups.size() != triangles.size())
            throw DataError("mesh group labels do not match the triangle count");
        for (const auto& v : vertices)
            if (!is_finite(v)) throw DataError("mesh has a non-finite vertex");
        for (std::size_t t = 0; t < triangles.size(); ++t) {
            for (int k = 0; k < 3; ++k)
                if (triangles[t][k] < 0 || triangles[t][k] >= static_cast<int>(vertices.size()))
                    throw DataError("mesh triangle " + std::to_string(t) + " has an out-of-range index");
            if (!(area(t) > 1e-12)) throw DataError("mesh triangle " + std::to_string(t) + " is degenerate");
        }
    }

    /// Appends `other`, relabelling its triangles with `group_id`.
    void append(const TriangleMesh& other, int group_id) {
        if (groups.empty() && !triangles.empty()) groups.assign(triangles.size(), 0);
        const int base = static_cast<int>(vertices.size());
        vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
        for (const auto& t : other.triangles) {
            triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
            groups.push_back(group_id);
        }
    }
};

/// Reads the Wavefront OBJ subset: `v x y z` and `f i j k` (1-based, the
/// `i/t/n` forms are accepted and only the position index is kept). `g`/`o`
/// lines named `object_<k>` set the group label of subsequent faces; every
/// other line type is ignored.
inline TriangleMesh parse_obj(std::istream& in) {
    TriangleMesh mesh;
    std::string line;
    int current_group = 0;
    bool saw_group = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                throw DataError("obj line " + std::to_string(line_no) + ": malformed vertex");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                const auto slash = tok.find('/');
                try {
                    idx.push_back(std::stoi(tok.substr(0, slash)));
                } catch (const std::exception&) {
                    throw DataError("obj line " + std::to_string(line_no) + ": malformed face index");
                }
            }
            if (idx.size() != 3)
                throw DataError("obj line " + std::to_string(line_no) + ": only triangular faces are supported");
            for (int& i : idx) {
                if (i < 1) throw DataError("obj line " + std::to_string(line_no) + ": face indices are 1-based");
                i -= 1;
            }
            mesh.triangles.push_back({idx[0], idx[1], idx[2]});
            mesh.groups.push_back(current_group);
        } else if (tag == "g" || tag == "o") {
            std::string name;
            ls >> name;
            constexpr std::string_view prefix = "object_";
            if (name.rfind(prefix, 0) == 0) {
                try {
                    current_group = std::stoi(name.substr(prefix.size()));
                    saw_group = true;
                } catch (const std::exception&) {
                    current_group = 0;
                }
            }
        }
    }
    if (!saw_group) mesh.groups.clear();
    mesh.validate();
    return mesh;
}

inline TriangleMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open mesh file " + path.string());
    return parse_obj(in);
}

inline void write_obj(std::ostream& out, const TriangleMesh& mesh) {
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    int last_group = -1;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!mesh.groups.empty() && mesh.groups[t] != last_group) {
            last_group = mesh.groups[t];
            out << "g object_" << last_group << '\n';
        }
        const auto& tri = mesh.triangles[t];
        out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
    }
}

inline void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write mesh file " + path.string());
    write_obj(out, mesh);
}

}  // namespace nerfvs
