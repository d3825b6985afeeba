// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <numbers>

#include "nerfvs/nerfvs.hpp"

using namespace nerfvs;
namespace fs = std::filesystem;

namespace {

SceneSpec empty_room() {
    SceneSpec s;
    s.wall_material.albedo = s.wall_material.albedo_alt = {0.5, 0.5, 0.5};
    s.floor_material = s.ceiling_material = s.wall_material;
    return s;
}

const Dataset& dataset64() {
    static const Dataset ds = generate_dataset(default_scene_spec(64, 20));
    return ds;
}

Real median(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nerfvs_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(BuildScene, TriangleCounts) {
    EXPECT_EQ(build_scene(empty_room()).mesh().size(), 12u);
    SceneSpec s = empty_room();
    ObjectSpec box;
    box.center = {0.1, -0.2, 0};
    s.objects.push_back(box);
    EXPECT_EQ(build_scene(s).mesh().size(), 24u);
}

TEST(BuildScene, RoomShellIsWatertight) {
    const Scene scene = build_scene(default_scene_spec());
    const TriangleMesh& m = scene.mesh();
    // Count undirected edges of the shell and check orientation consistency.
    std::map<std::pair<int, int>, int> undirected, directed;
    for (std::size_t t = 0; t < m.size(); ++t) {
        if (m.groups[t] != 0) continue;
        for (int k = 0; k < 3; ++k) {
            const int a = m.triangles[t][k], b = m.triangles[t][(k + 1) % 3];
            undirected[{std::min(a, b), std::max(a, b)}] += 1;
            directed[{a, b}] += 1;
        }
    }
    EXPECT_EQ(undirected.size(), 18u);
    for (const auto& [e, n] : undirected) EXPECT_EQ(n, 2);
    for (const auto& [e, n] : directed) EXPECT_EQ(n, 1);
}

TEST(BuildScene, ShellNormalsPointInward) {
    const Scene scene = build_scene(empty_room());
    for (std::size_t t = 0; t < scene.mesh().size(); ++t) {
        const Vec3 c = (scene.mesh().corner(t, 0) + scene.mesh().corner(t, 1) + scene.mesh().corner(t, 2)) / 3.0;
        EXPECT_LT(dot(scene.mesh().normal(t), c), 0);
    }
}

TEST(BuildScene, ObjectsOutsideTheRoomAreRejected) {
    SceneSpec s = empty_room();
    ObjectSpec box;
    box.center = {0.85, 0, 0};
    s.objects.push_back(box);
    EXPECT_THROW(build_scene(s), ConfigError);
    s = empty_room();
    ObjectSpec ball;
    ball.kind = ObjectSpec::Kind::Sphere;
    ball.center = {0, 0.55, 0};
    s.objects.push_back(ball);
    EXPECT_THROW(build_scene(s), ConfigError);
    s = empty_room();
    s.room_half_extents = {1.2, 0.5, 0.5};
    EXPECT_THROW(build_scene(s), ConfigError);
}

TEST(RenderGt, ClosedRoomHasNoMissPixels) {
    const Scene scene = build_scene(empty_room());
    for (const Real yaw : {0.0, 1.0, 2.5}) {
        const auto cam = CameraModel::look_at({0.1, 0, 0.2}, Vec3{0.1, 0, 0.2} + direction_from_angles(yaw, 0.3),
                                              {0, 1, 0}, 32, 24, 1.4);
        const Image img = render_gt(scene, cam);
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 32; ++x) EXPECT_GT(img.pixel(x, y).x + img.pixel(x, y).y + img.pixel(x, y).z, 0);
    }
}

TEST(RenderGt, FlatWallUnderNormalLightIsAlbedoPlusAmbient) {
    SceneSpec s = empty_room();
    s.wall_material.albedo = s.wall_material.albedo_alt = {0.3, 0.5, 0.9};
    s.light_direction = {0, 0, 1};  // normal of the far wall at z = -0.9
    const Scene scene = build_scene(s);
    const auto cam = CameraModel::look_at({0, 0, 0}, {0, 0, -1}, {0, 1, 0}, 16, 16, std::numbers::pi / 3);
    const Image img = render_gt(scene, cam);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            const Vec3 c = img.pixel(x, y);
            EXPECT_NEAR(c.x, 0.5, 1e-12);
            EXPECT_NEAR(c.y, 0.7, 1e-12);
            EXPECT_NEAR(c.z, 1.0, 1e-12);  // 1.1 clamped
        }
}

TEST(RenderGt, DeterministicAndThreadIndependent) {
    const Scene scene = build_scene(default_scene_spec());
    const auto cams = make_trajectory(default_scene_spec(48).trajectory);
    EXPECT_EQ(render_gt(scene, cams.train[3], 1).data, render_gt(scene, cams.train[3], 4).data);
}

TEST(RenderGt, HitMaskMatchesTheDistanceBake) {
    const Dataset& ds = dataset64();
    for (std::size_t v = 0; v < ds.train.size(); ++v) {
        const Image& img = ds.train.images[v];
        const DistanceMap& d = ds.priors.distance[v];
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const Vec3 c = img.pixel(x, y);
                // A closed room hits everywhere; shading adds ambient, so hit pixels are never black.
                EXPECT_EQ(DistanceMap::is_hit(d(x, y)), c.x + c.y + c.z > 0);
            }
        EXPECT_EQ(ds.train.gt_distance[v].values, d.values);
    }
}

TEST(Trajectory, SplitCounts) {
    TrajectorySpec t;
    t.n_train = 10;
    t.extrap_grid = {2, 2, 1};
    t.extrap_directions = 8;
    const CameraSplits s = make_trajectory(t);
    EXPECT_EQ(s.train.size(), 10u);
    EXPECT_EQ(s.interp.size(), 9u);
    EXPECT_EQ(s.extrap.size(), 32u);
    t.n_train = 3;
    EXPECT_THROW(make_trajectory(t), ConfigError);
}

TEST(Trajectory, InterpolationCamerasArePoseMidpoints) {
    const CameraSplits s = make_trajectory(default_scene_spec().trajectory);
    for (std::size_t i = 0; i < s.interp.size(); ++i) {
        const CameraModel& a = s.train[i];
        const CameraModel& b = s.train[i + 1];
        const CameraModel& m = s.interp[i];
        EXPECT_NEAR(norm(m.position - (a.position + b.position) * 0.5), 0, 1e-12);
        // Midpoint rotation is equidistant from both ends on SO(3).
        auto angle = [](const Mat3& p, const Mat3& q) {
            const Mat3 r = p.transposed() * q;
            return std::acos(std::clamp((r(0, 0) + r(1, 1) + r(2, 2) - 1) / 2, Real(-1), Real(1)));
        };
        EXPECT_NEAR(angle(a.rotation, m.rotation), angle(m.rotation, b.rotation), 1e-6);
        EXPECT_NEAR(angle(a.rotation, m.rotation) * 2, angle(a.rotation, b.rotation), 1e-6);
    }
}

TEST(Trajectory, ExtrapolationYawsAreEvenlySpread) {
    TrajectorySpec t;
    t.extrap_grid = {1, 1, 1};
    t.extrap_directions = 8;
    const CameraSplits s = make_trajectory(t);
    ASSERT_EQ(s.extrap.size(), 8u);
    for (std::size_t k = 0; k < 8; ++k) {
        const Vec3 fwd = s.extrap[k].rotation * Vec3{0, 0, -1};
        const Vec3 next = s.extrap[(k + 1) % 8].rotation * Vec3{0, 0, -1};
        const Real yaw_step = std::atan2(cross(Vec3{fwd.x, 0, fwd.z}, Vec3{next.x, 0, next.z}).y, dot(Vec3{fwd.x, 0, fwd.z}, Vec3{next.x, 0, next.z}));
        EXPECT_NEAR(std::abs(yaw_step), std::numbers::pi / 4, 1e-9);
    }
}

TEST(Trajectory, FocusCoverageDominatesWallCoverage) {
    const Dataset& ds = dataset64();
    const Scene scene = build_scene(ds.spec);
    std::vector<int> focus, walls;
    for (std::size_t v = 0; v < ds.train.size(); ++v) {
        const CameraModel& cam = ds.train.cameras[v];
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x) {
                const auto hit = scene.scaffold().raycast(pixel_center_ray(cam, x, y));
                ASSERT_TRUE(hit);
                const int group = scene.mesh().groups[hit->triangle_id];
                const int cov = ds.priors.coverage[v](x, y);
                // Focus: the table and the cube on it. Walls and ceiling: shell
                // faces whose inward normal is not the floor's +y.
                if (group == 1 || group == 2) focus.push_back(cov);
                if (group == 0 && scene.mesh().normal(hit->triangle_id).y < 0.5) walls.push_back(cov);
            }
    }
    ASSERT_FALSE(focus.empty());
    ASSERT_FALSE(walls.empty());
    EXPECT_GE(median(focus), 3 * median(walls));
    EXPECT_LE(median(walls), LossWeights{}.alpha);
}

TEST(Trajectory, ExtrapolationSplitHasFewShotPixels) {
    EXPECT_GT(count_low_coverage_pixels(dataset64().extrap, 2), 0u);
}

TEST(Perturb, ZeroMagnitudeIsIdentity) {
    const TriangleMesh m = build_scene(default_scene_spec()).mesh();
    for (const auto mode : {PerturbMode::VertexNoise, PerturbMode::DeleteRandomFaces, PerturbMode::OffsetObject}) {
        const TriangleMesh p = perturb_scaffold(m, mode, 0, 5);
        EXPECT_EQ(p.vertices, m.vertices);
        EXPECT_EQ(p.triangles, m.triangles);
        EXPECT_EQ(p.groups, m.groups);
    }
}

TEST(Perturb, DeletionRemovesFloorOfTheFraction) {
    const TriangleMesh m = build_scene(default_scene_spec()).mesh();
    const std::size_t t = m.size();
    const TriangleMesh p = perturb_scaffold(m, PerturbMode::DeleteRandomFaces, 0.1, 3);
    EXPECT_EQ(p.size(), t - static_cast<std::size_t>(std::floor(0.1 * t)));
    EXPECT_EQ(perturb_scaffold(m, PerturbMode::DeleteRandomFaces, 0.1, 3).triangles, p.triangles);
}

TEST(Perturb, VertexNoiseHasTheRequestedSpread) {
    const TriangleMesh m = build_scene(default_scene_spec()).mesh();
    const TriangleMesh p = perturb_scaffold(m, PerturbMode::VertexNoise, 0.01, 8);
    Real sq = 0;
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        const Vec3 d = p.vertices[i] - m.vertices[i];
        sq += dot(d, d);
    }
    const Real sd = std::sqrt(sq / (3.0 * m.vertices.size()));
    EXPECT_NEAR(sd, 0.01, 0.002);
}

TEST(Perturb, OffsetObjectChangesOnlyPixelsOnThatObject) {
    const Dataset& ds = dataset64();
    const int group = 2;
    const TriangleMesh moved = perturb_scaffold(ds.scaffold, PerturbMode::OffsetObject, 0.05, 1, group);
    const Scaffold clean{ds.scaffold}, shifted{moved};
    std::size_t changed = 0;
    for (const auto& cam : ds.train.cameras) {
        const DistanceMap a = bake_distance_map(clean, cam);
        const DistanceMap b = bake_distance_map(shifted, cam);
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x) {
                if (a(x, y) == b(x, y)) continue;
                ++changed;
                // A changed pixel must see the object in the clean or the shifted mesh.
                const Ray r = pixel_center_ray(cam, x, y);
                const auto ha = clean.raycast(r);
                const auto hb = shifted.raycast(r);
                ASSERT_TRUE(ha && hb);
                EXPECT_TRUE(ds.scaffold.groups[ha->triangle_id] == group || moved.groups[hb->triangle_id] == group);
            }
    }
    EXPECT_GT(changed, 0u);
}

TEST(Perturb, UnknownModeAndBadMagnitude) {
    EXPECT_THROW(parse_perturb_mode("shift"), ConfigError);
    EXPECT_EQ(parse_perturb_mode("offset-object"), PerturbMode::OffsetObject);
    const TriangleMesh m = build_scene(empty_room()).mesh();
    EXPECT_THROW(perturb_scaffold(m, PerturbMode::VertexNoise, -1, 0), ConfigError);
    EXPECT_THROW(perturb_scaffold(m, PerturbMode::OffsetObject, 0.05, 0), ConfigError);
    EXPECT_THROW(perturb_scaffold(m, PerturbMode::DeleteRandomFaces, 1.0, 0), ConfigError);
}

TEST(SceneSpecJson, RoundTrips) {
    SceneSpec s = default_scene_spec(40, 12);
    s.specular = 0.3;
    s.seed = 77;
    const SceneSpec back = scene_spec_from_json(scene_spec_to_json(s));
    EXPECT_EQ(scene_spec_to_json(back).dump(), scene_spec_to_json(s).dump());
    EXPECT_THROW(scene_spec_from_json(nlohmann::json::parse(R"({"room_half_extents": [1, 2]})")), DataError);
}

TEST(DatasetIo, SaveLoadAndByteIdenticalRegeneration) {
    const SceneSpec spec = default_scene_spec(24, 6);
    const fs::path a = temp_dir("ds_a"), b = temp_dir("ds_b");
    save_dataset(a, generate_dataset(spec));
    save_dataset(b, generate_dataset(spec, 3));
    EXPECT_EQ(directory_digests(a), directory_digests(b));
    EXPECT_TRUE(fs::exists(a / "cameras_train.json"));
    EXPECT_TRUE(fs::exists(a / "gt" / "extrap"));
    EXPECT_TRUE(fs::exists(a / "priors"));
    EXPECT_TRUE(fs::exists(a / "scaffold.obj"));
    EXPECT_TRUE(fs::exists(a / "spec.json"));

    const Dataset ds = load_dataset(a);
    const Dataset ref = generate_dataset(spec);
    EXPECT_EQ(ds.train.size(), ref.train.size());
    EXPECT_EQ(ds.extrap.size(), ref.extrap.size());
    EXPECT_EQ(ds.train.images[0].data, quantize8(ref.train.images[0]).data);
    EXPECT_EQ(ds.priors.coverage[2].values, ref.priors.coverage[2].values);
    for (std::size_t i = 0; i < ds.priors.distance[1].values.values.size(); ++i)
        EXPECT_EQ(ds.priors.distance[1].values.values[i],
                  static_cast<Real>(static_cast<float>(ref.priors.distance[1].values.values[i])));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(DatasetIo, MissingPiecesAreDataErrors) {
    const fs::path a = temp_dir("ds_missing");
    save_dataset(a, generate_dataset(default_scene_spec(16, 4)), false);
    EXPECT_THROW(load_dataset(a, true), DataError);
    EXPECT_NO_THROW(load_dataset(a, false));
    fs::remove(a / "cameras_interp.json");
    EXPECT_THROW(load_dataset(a, false), DataError);
    fs::remove_all(a);
}
