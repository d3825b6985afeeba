// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nerfvs/nerfvs.hpp"

namespace fs = std::filesystem;
using namespace nerfvs;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kDivergence = 4 };

struct Options {
    int threads = 0;

    // scene gen
    std::string spec_path;
    int image_size = 64;
    int n_train = 20;
    std::string out;

    // scene perturb
    std::string data;
    std::string mode;
    double magnitude = 0;
    std::uint64_t seed = 0;
    int object_group = 0;

    // scaffold bake
    double eps = kDefaultShadowEps;

    // train
    std::string config_path;
    std::vector<std::string> overrides;

    // render / eval
    std::string ckpt;
    std::string cameras;
    int n_samples = 0;
    std::string split = "extrap";
    std::string report;
};

TrainConfig resolve_config(const Options& o) {
    TrainConfig c = o.config_path.empty() ? desk_preset() : load_config(o.config_path, desk_preset());
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_key(c, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    c.validate();
    return c;
}

SceneSpec resolve_spec(const Options& o) {
    if (o.spec_path.empty()) return default_scene_spec(o.image_size, o.n_train);
    return scene_spec_from_json(read_json(o.spec_path));
}

fs::path checkpoint_file(const std::string& p) {
    const fs::path path(p);
    return fs::is_directory(path) ? path / "grid.nvsg" : path;
}

int run_scene_gen(const Options& o, int threads) {
    const Dataset ds = generate_dataset(resolve_spec(o), threads);
    save_dataset(o.out, ds, false);
    RunManifest m;
    m.stage = "scene";
    m.config = scene_spec_to_json(ds.spec).dump();
    if (!o.spec_path.empty()) m.inputs["spec"] = file_digest(o.spec_path);
    m.outputs = {"spec.json", "scaffold.obj", "cameras_train.json", "cameras_interp.json", "cameras_extrap.json", "gt/"};
    m.save(o.out);
    std::cout << "wrote " << ds.train.size() << " train, " << ds.interp.size() << " interp, " << ds.extrap.size()
              << " extrap views to " << o.out << '\n';
    return kOk;
}

int run_scene_perturb(const Options& o) {
    fs::path dir = o.data;
    if (!o.out.empty() && fs::path(o.out) != dir) {
        fs::create_directories(o.out);
        fs::copy(dir, o.out, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
        dir = o.out;
    }
    const TriangleMesh mesh = load_obj(dir / "scaffold.obj");
    const TriangleMesh out = perturb_scaffold(mesh, parse_perturb_mode(o.mode), o.magnitude, o.seed, o.object_group);
    save_obj(dir / "scaffold.obj", out);
    // Priors baked from the old scaffold no longer apply.
    fs::remove_all(dir / "priors");
    fs::remove(dir / kManifestName);
    std::cout << "scaffold: " << mesh.size() << " -> " << out.size() << " triangles\n";
    return kOk;
}

int run_scaffold_bake(const Options& o, int threads) {
    const fs::path dir = o.data;
    const Scaffold scaffold{load_obj(dir / "scaffold.obj")};
    const auto cams = load_cameras(dir / "cameras_train.json");
    save_priors(dir / "priors", bake_priors(scaffold, cams, o.eps, threads));
    RunManifest m;
    m.stage = "bake";
    m.config = "shadow_eps = " + std::to_string(o.eps);
    m.inputs = {{"scaffold.obj", file_digest(dir / "scaffold.obj")}, {"cameras_train.json", file_digest(dir / "cameras_train.json")}};
    m.outputs = {"dist_*.pfm", "cov_*.pfm"};
    m.save(dir / "priors");
    std::cout << "baked priors for " << cams.size() << " training views\n";
    return kOk;
}

int run_train(const Options& o, int threads) {
    const TrainConfig config = resolve_config(o);
    const Dataset ds = load_dataset(o.data, true);
    const fs::path out = o.out;
    fs::create_directories(out);
    fs::remove(out / kManifestName);
    const auto t0 = std::chrono::steady_clock::now();
    TrainHooks hooks;
    hooks.on_iteration = [&](const TrainLogEntry& e) {
        if (e.iteration % config.log_every == 0)
            std::cerr << "iter " << e.iteration << " loss " << e.total << (e.regularized ? "" : " (relax)") << '\n';
    };
    const TrainResult tr = train(ds, config, threads, hooks);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_checkpoint(out / "grid.nvsg", tr.grid,
                    {{"tool_version", kToolVersion}, {"iterations", config.iterations}, {"seed", config.seed}});
    {
        std::ofstream csv(out / "train_log.csv");
        write_log_csv(csv, tr.log, config.log_every);
        std::ofstream cfg(out / "config.cfg");
        cfg << format_config(config);
    }
    RunManifest m;
    m.stage = "train";
    m.config = format_config(config);
    m.inputs = directory_digests(o.data);
    m.outputs = {"grid.nvsg", "grid.nvsg.json", "train_log.csv", "config.cfg"};
    m.timings_s["train"] = dt;
    m.save(out);
    std::cout << "final loss " << (tr.log.empty() ? 0.0 : tr.log.back().total) << ", checkpoint " << (out / "grid.nvsg").string()
              << '\n';
    return kOk;
}

int run_render(const Options& o, int threads) {
    const fs::path ckpt = checkpoint_file(o.ckpt);
    const VoxelGrid grid = load_checkpoint(ckpt);
    const int n = o.n_samples > 0 ? o.n_samples : desk_preset().n_samples;
    const auto written = cmd_render(grid, load_cameras(o.cameras), o.out, n, kDefaultNear, threads);
    if (!written.empty()) {
        RunManifest m;
        m.stage = "render";
        m.config = "n_samples_per_ray = " + std::to_string(n);
        m.inputs = {{"checkpoint", file_digest(ckpt)}, {"cameras", file_digest(o.cameras)}};
        for (const auto& p : written) m.outputs.push_back(p.filename().string());
        m.save(o.out);
    }
    std::cout << "rendered " << written.size() / 2 << " views\n";
    return kOk;
}

int run_eval(const Options& o, int threads) {
    const VoxelGrid grid = load_checkpoint(checkpoint_file(o.ckpt));
    const Dataset ds = load_dataset(o.data, false);
    const int n = o.n_samples > 0 ? o.n_samples : desk_preset().n_samples;
    const EvalReport r = evaluate_split(grid, ds.split(o.split), o.split, n, kDefaultNear, threads);
    if (!o.report.empty()) {
        const fs::path p(o.report);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_json(p, r.to_json());
    }
    std::cout << o.split << ": PSNR " << r.mean_psnr << " dB, SSIM " << r.mean_ssim;
    if (r.mean_depth_rmse > 0) std::cout << ", depth RMSE " << r.mean_depth_rmse;
    std::cout << '\n';
    return kOk;
}

int run_ablate(const Options& o, int threads) {
    const TrainConfig config = resolve_config(o);
    const Dataset ds = load_dataset(o.data, true);
    const fs::path out = o.out.empty() ? fs::path(o.data) / "ablation" : fs::path(o.out);
    const auto results = run_ablation(ds, ablation_variants(config), threads, out);
    write_ablation_csv(std::cout, results);
    return kOk;
}

int run_pipeline(const Options& o, int threads) {
    PipelineOptions opt;
    opt.threads = threads;
    cmd_pipeline(resolve_spec(o), resolve_config(o), o.out, opt);
    std::cout << "pipeline complete: " << o.out << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scaffold-regularized radiance fields for free view synthesis at desk scale"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--threads", o.threads, "Worker threads (default: NERFVS_THREADS or all cores)")->check(CLI::NonNegativeNumber);

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "key = value training config")->check(CLI::ExistingFile);
        cmd->add_option("--set", o.overrides, "Override one config key (key=value), repeatable");
    };

    auto* scene = app.add_subcommand("scene", "Synthetic scene datasets");
    scene->require_subcommand(1);
    auto* gen = scene->add_subcommand("gen", "Render ground truth and camera splits for a scene spec");
    gen->add_option("--spec", o.spec_path, "Scene spec JSON (default: built-in furnished room)")->check(CLI::ExistingFile);
    gen->add_option("--size", o.image_size, "Image size for the built-in scene")->check(CLI::PositiveNumber);
    gen->add_option("--n-train", o.n_train, "Training views for the built-in scene")->check(CLI::Range(4, 10000));
    gen->add_option("--out", o.out, "Dataset directory")->required();

    auto* perturb = scene->add_subcommand("perturb", "Corrupt a dataset's scaffold mesh");
    perturb->add_option("--data", o.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    perturb->add_option("--mode", o.mode, "vertex-noise, delete-random-faces or offset-object")
        ->required()
        ->check(CLI::IsMember({"vertex-noise", "delete-random-faces", "offset-object"}));
    perturb->add_option("--mag", o.magnitude, "Perturbation magnitude")->required()->check(CLI::NonNegativeNumber);
    perturb->add_option("--seed", o.seed, "Random seed");
    perturb->add_option("--object", o.object_group, "Object index for offset-object (default: seeded choice)");
    perturb->add_option("--out", o.out, "Write a perturbed copy here instead of editing in place");

    auto* scaffold = app.add_subcommand("scaffold", "Scaffold priors");
    scaffold->require_subcommand(1);
    auto* bake = scaffold->add_subcommand("bake", "Bake distance and coverage maps for the training views");
    bake->add_option("--data", o.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    bake->add_option("--eps", o.eps, "Shadow-map distance tolerance")->check(CLI::PositiveNumber);

    auto* train_cmd = app.add_subcommand("train", "Optimize a voxel radiance field");
    add_config_opts(train_cmd);
    train_cmd->add_option("--data", o.data, "Dataset directory with baked priors")->required()->check(CLI::ExistingDirectory);
    train_cmd->add_option("--out", o.out, "Checkpoint directory")->required();

    auto* render = app.add_subcommand("render", "Render a checkpoint through a camera set");
    render->add_option("--ckpt", o.ckpt, "Checkpoint file or directory")->required()->check(CLI::ExistingPath);
    render->add_option("--cameras", o.cameras, "Camera JSON")->required()->check(CLI::ExistingFile);
    render->add_option("--out", o.out, "Output directory")->required();
    render->add_option("--n-samples", o.n_samples, "Samples per ray")->check(CLI::Range(2, 1 << 16));

    auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset split");
    eval->require_subcommand(0, 1);
    eval->add_option("--ckpt", o.ckpt, "Checkpoint file or directory")->check(CLI::ExistingPath);
    eval->add_option("--data", o.data, "Dataset directory")->check(CLI::ExistingDirectory);
    eval->add_option("--split", o.split, "train, interp or extrap")->check(CLI::IsMember({"train", "interp", "extrap"}));
    eval->add_option("--report", o.report, "Write the report as JSON");
    eval->add_option("--n-samples", o.n_samples, "Samples per ray")->check(CLI::Range(2, 1 << 16));
    auto* ablate = eval->add_subcommand("ablate", "Train and compare the ablation variants");
    add_config_opts(ablate);
    ablate->add_option("--data", o.data, "Dataset directory with baked priors")->required()->check(CLI::ExistingDirectory);
    ablate->add_option("--out", o.out, "Output directory (default: <data>/ablation)");

    auto* pipeline = app.add_subcommand("pipeline", "Scene generation through evaluation in one run");
    pipeline->add_option("--spec", o.spec_path, "Scene spec JSON (default: built-in furnished room)")->check(CLI::ExistingFile);
    pipeline->add_option("--size", o.image_size, "Image size for the built-in scene")->check(CLI::PositiveNumber);
    add_config_opts(pipeline);
    pipeline->add_option("--out", o.out, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const int threads = resolve_threads(o.threads);
        if (gen->parsed()) return run_scene_gen(o, threads);
        if (perturb->parsed()) return run_scene_perturb(o);
        if (bake->parsed()) return run_scaffold_bake(o, threads);
        if (train_cmd->parsed()) return run_train(o, threads);
        if (render->parsed()) return run_render(o, threads);
        if (ablate->parsed()) return run_ablate(o, threads);
        if (eval->parsed()) {
            if (o.ckpt.empty() || o.data.empty()) {
                std::cerr << "eval: --ckpt and --data are required\n";
                return kUsage;
            }
            return run_eval(o, threads);
        }
        if (pipeline->parsed()) return run_pipeline(o, threads);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << '\n';
        return kDivergence;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
