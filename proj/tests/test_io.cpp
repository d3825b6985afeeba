// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nerfvs/nerfvs.hpp"

using namespace nerfvs;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nerfvs_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

/// Grid whose parameters are exactly representable in single precision.
VoxelGrid float_exact_grid(int res, int degree, std::uint64_t seed) {
    VoxelGrid g(res, degree);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-3, 3);
    for (auto& p : g.params()) p = u(rng);
    return g;
}

/// Runs the CLI and returns its exit status.
int run_cli(const std::string& args) {
    const std::string cmd = std::string(NERFVS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const TrainResult& smoke_training() {
    static const Dataset ds = generate_dataset(default_scene_spec(32, 8));
    static const TrainResult r = train(ds, smoke_preset(), 1);
    return r;
}

}  // namespace

TEST(Checkpoint, RoundTripIsExact) {
    const VoxelGrid g = float_exact_grid(5, 2, 1);
    const VoxelGrid back = decode_checkpoint(encode_checkpoint(g));
    EXPECT_EQ(back.resolution(), 5);
    EXPECT_EQ(back.sh_degree(), 2);
    EXPECT_EQ(back, g);

    const fs::path dir = temp_dir("ckpt");
    save_checkpoint(dir / "g.nvsg", g, {{"note", "x"}});
    EXPECT_EQ(load_checkpoint(dir / "g.nvsg"), g);
    EXPECT_TRUE(fs::exists(dir / "g.nvsg.json"));
    fs::remove_all(dir);
}

TEST(Checkpoint, CorruptionIsDetected) {
    const auto good = encode_checkpoint(float_exact_grid(3, 1, 2));
    auto bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_checkpoint(bad_magic), DataError);
    auto truncated = good;
    truncated.resize(good.size() - 4);
    EXPECT_THROW(decode_checkpoint(truncated), DataError);
    auto version = good;
    version[4] = 9;
    EXPECT_THROW(decode_checkpoint(version), DataError);
    auto nan = good;
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
    std::memcpy(&nan[16], &bits, 4);
    EXPECT_THROW(decode_checkpoint(nan), DataError);
    EXPECT_THROW(decode_checkpoint({}), DataError);
    EXPECT_THROW(load_checkpoint("/nonexistent/grid.nvsg"), DataError);
}

TEST(Render, WritesOnePpmAndDepthPerCameraDeterministically) {
    const VoxelGrid& g = smoke_training().grid;
    const auto cams = make_trajectory(default_scene_spec(24, 6).trajectory).interp;
    const fs::path a = temp_dir("render_a"), b = temp_dir("render_b");
    const auto written = cmd_render(g, cams, a, 32, kDefaultNear, 1);
    cmd_render(g, cams, b, 32, kDefaultNear, 3);
    EXPECT_EQ(written.size(), 2 * cams.size());
    EXPECT_TRUE(fs::exists(a / "0000.ppm"));
    EXPECT_TRUE(fs::exists(a / "depth_0000.pfm"));
    EXPECT_EQ(directory_digests(a), directory_digests(b));
    const Image img = load_ppm(a / "0001.ppm");
    EXPECT_EQ(img.width, 24);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Render, EmptyCameraListWritesNothing) {
    const fs::path a = temp_dir("render_empty");
    EXPECT_TRUE(cmd_render(init_grid(4, 1, 0), {}, a / "out", 16).empty());
    EXPECT_FALSE(fs::exists(a / "out"));
    fs::remove_all(a);
}

TEST(Render, QuadratureConvergesOnATrainedGrid) {
    const VoxelGrid& g = smoke_training().grid;
    const auto cams = make_trajectory(default_scene_spec(24, 6).trajectory);
    Real worst = 0;
    for (const auto* cam : {&cams.interp[1], &cams.extrap[3]}) {
        const Image a = render_view(g, *cam, 128).color;
        const Image b = render_view(g, *cam, 256).color;
        for (std::size_t i = 0; i < a.data.size(); ++i) worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    }
    EXPECT_LT(worst, 1e-2);
}

TEST(Manifest, JsonRoundTrip) {
    RunManifest m;
    m.stage = "train";
    m.config = "iterations = 3\n";
    m.inputs = {{"a", "0123"}};
    m.outputs = {"grid.nvsg"};
    m.timings_s = {{"train", 1.5}};
    const RunManifest back = RunManifest::from_json(m.to_json());
    EXPECT_EQ(back.stage, m.stage);
    EXPECT_EQ(back.config, m.config);
    EXPECT_EQ(back.inputs, m.inputs);
    EXPECT_EQ(back.outputs, m.outputs);
    EXPECT_EQ(back.timings_s, m.timings_s);
    EXPECT_EQ(m.to_json()["tool_version"], kToolVersion);
}

TEST(Pipeline, SmokeRunSkipsAndRestartsStages) {
    const fs::path out = temp_dir("pipeline");
    std::ostringstream log;
    PipelineOptions opt;
    opt.log = &log;
    const auto t0 = std::chrono::steady_clock::now();
    cmd_pipeline(default_scene_spec(32, 8), smoke_preset(), out, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 60.0);
    for (const char* d : {"scene", "scene/priors", "train", "render", "eval", "."})
        EXPECT_TRUE(fs::exists(out / d / kManifestName)) << d;
    EXPECT_TRUE(fs::exists(out / "eval" / "report_extrap.json"));
    EXPECT_TRUE(fs::exists(out / "train" / "train_log.csv"));
    const auto grid_digest = file_digest(out / "train" / "grid.nvsg");

    // A finished run is skipped entirely.
    log.str("");
    cmd_pipeline(default_scene_spec(32, 8), smoke_preset(), out, opt);
    EXPECT_EQ(log.str().find("running"), std::string::npos) << log.str();

    // A stage without a manifest runs again, and so do the stages after it.
    fs::remove(out / "render" / kManifestName);
    log.str("");
    cmd_pipeline(default_scene_spec(32, 8), smoke_preset(), out, opt);
    EXPECT_NE(log.str().find("running render"), std::string::npos);
    EXPECT_EQ(log.str().find("running train"), std::string::npos);
    EXPECT_EQ(file_digest(out / "train" / "grid.nvsg"), grid_digest);

    // A config change retrains.
    TrainConfig changed = smoke_preset();
    changed.iterations = 20;
    log.str("");
    cmd_pipeline(default_scene_spec(32, 8), changed, out, opt);
    EXPECT_NE(log.str().find("running train"), std::string::npos);
    EXPECT_EQ(log.str().find("running scene"), std::string::npos);
    fs::remove_all(out);
}

TEST(Pipeline, StageFailureNamesTheStage) {
    const fs::path out = temp_dir("pipeline_fail");
    SceneSpec spec = default_scene_spec(16, 4);
    spec.objects[0].center = {5, 0, 0};
    std::ostringstream log;
    PipelineOptions opt;
    opt.log = &log;
    EXPECT_THROW(cmd_pipeline(spec, smoke_preset(), out, opt), ConfigError);
    EXPECT_NE(log.str().find("stage 'scene' failed"), std::string::npos);
    EXPECT_FALSE(fs::exists(out / "scene" / kManifestName));
    fs::remove_all(out);
}

TEST(Cli, HelpOnEverySubcommandExitsZero) {
    for (const char* sub : {"", "scene", "scene gen", "scene perturb", "scaffold bake", "train", "render", "eval",
                            "eval ablate", "pipeline"})
        EXPECT_EQ(run_cli(std::string(sub) + " --help"), 0) << sub;
}

TEST(Cli, ExitCodesByErrorKind) {
    const fs::path dir = temp_dir("cli");
    EXPECT_EQ(run_cli("render"), 2);
    EXPECT_EQ(run_cli("train --data /nonexistent/dir --out " + (dir / "t").string()), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    {
        std::ofstream(dir / "bad.nvsg") << "garbage";
        std::ofstream(dir / "cams.json") << "[]";
    }
    EXPECT_EQ(run_cli("render --ckpt " + (dir / "bad.nvsg").string() + " --cameras " + (dir / "cams.json").string() +
                      " --out " + (dir / "r").string()),
              3);
    {
        std::ofstream(dir / "bad.cfg") << "no_such_key = 1\n";
    }
    EXPECT_EQ(run_cli("pipeline --config " + (dir / "bad.cfg").string() + " --out " + (dir / "p").string()), 2);
    fs::remove_all(dir);
}

TEST(Cli, SceneGenAndPerturbWriteDatasets) {
    const fs::path dir = temp_dir("cli_scene");
    write_json(dir / "spec.json", scene_spec_to_json(default_scene_spec(16, 4)));
    ASSERT_EQ(run_cli("scene gen --spec " + (dir / "spec.json").string() + " --out " + (dir / "ds").string()), 0);
    EXPECT_FALSE(fs::exists(dir / "ds" / "priors"));
    ASSERT_EQ(run_cli("scaffold bake --data " + (dir / "ds").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "ds" / "priors" / "cov_0000.pfm"));
    ASSERT_EQ(run_cli("scene perturb --data " + (dir / "ds").string() +
                      " --mode offset-object --mag 0.05 --out " + (dir / "moved").string()),
              0);
    const TriangleMesh clean = load_obj(dir / "ds" / "scaffold.obj");
    const TriangleMesh moved = load_obj(dir / "moved" / "scaffold.obj");
    EXPECT_EQ(clean.size(), moved.size());
    EXPECT_NE(clean.vertices, moved.vertices);
    EXPECT_EQ(run_cli("scene perturb --data " + (dir / "ds").string() + " --mode sideways --mag 0.05 --out " +
                      (dir / "x").string()),
              2);
    fs::remove_all(dir);
}
