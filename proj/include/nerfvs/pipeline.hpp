// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nerfvs/checkpoint.hpp"
#include "nerfvs/dataset.hpp"
#include "nerfvs/evaluation.hpp"
#include "nerfvs/trainer.hpp"

namespace nerfvs {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
inline std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

/// Digests every regular file below `dir`, keyed by relative path, skipping
/// manifests.
inline std::map<std::string, std::string> directory_digests(const fs::path& dir) {
    std::map<std::string, std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == kManifestName) continue;
        out[fs::relative(e.path(), dir).generic_string()] = file_digest(e.path());
    }
    return out;
}

struct RunManifest {
    std::string stage;
    std::string config;                           // snapshot of the settings that shaped the outputs
    std::map<std::string, std::string> inputs;    // path to digest
    std::vector<std::string> outputs;
    std::map<std::string, Real> timings_s;

    nlohmann::json to_json() const {
        return {{"tool_version", kToolVersion}, {"stage", stage},   {"config", config},
                {"inputs", inputs},             {"outputs", outputs}, {"timings_s", timings_s}};
    }
    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        try {
            m.stage = j.at("stage").get<std::string>();
            m.config = j.at("config").get<std::string>();
            m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
            m.outputs = j.at("outputs").get<std::vector<std::string>>();
            m.timings_s = j.at("timings_s").get<std::map<std::string, Real>>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("invalid manifest: ") + e.what());
        }
        return m;
    }
    void save(const fs::path& dir) const { write_json(dir / kManifestName, to_json()); }
};

/// True when `dir` holds a manifest for the same stage, configuration and
/// inputs, which means the stage completed and can be skipped.
inline bool stage_is_current(const fs::path& dir, const RunManifest& planned) {
    const fs::path p = dir / kManifestName;
    if (!fs::exists(p)) return false;
    try {
        const RunManifest old = RunManifest::from_json(read_json(p));
        return old.stage == planned.stage && old.config == planned.config && old.inputs == planned.inputs;
    } catch (const DataError&) {
        return false;
    }
}

// --- render ---------------------------------------------------------------------

/// Writes <idx>.ppm and depth_<idx>.pfm per camera into `out_dir`. Returns
/// the written paths; an empty camera list writes nothing.
inline std::vector<fs::path> cmd_render(const VoxelGrid& grid, const std::vector<CameraModel>& cameras,
                                        const fs::path& out_dir, int n_samples, Real near = kDefaultNear,
                                        int threads = 1) {
    if (n_samples < 2) throw ConfigError("n_samples must be at least 2");
    std::vector<fs::path> written;
    if (cameras.empty()) return written;
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        const RenderedView v = render_view(grid, cameras[i], n_samples, near, threads);
        const fs::path img = out_dir / (index_name(i) + ".ppm");
        const fs::path depth = out_dir / ("depth_" + index_name(i) + ".pfm");
        save_ppm(img, v.color);
        Raster<float> d(v.depth.width, v.depth.height);
        for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] = static_cast<float>(v.depth.values[k]);
        save_pfm(depth, d);
        written.push_back(img);
        written.push_back(depth);
    }
    return written;
}

// --- full pipeline ---------------------------------------------------------------

struct PipelineOptions {
    int threads = 1;
    Real shadow_eps = kDefaultShadowEps;
    std::vector<std::string> eval_splits{"interp", "extrap"};
    std::ostream* log = &std::cerr;
};

/// Names the stage that failed; the wrapped exception is rethrown unchanged
/// so callers keep its category.
inline void report_stage_failure(const PipelineOptions& opt, const std::string& stage, const std::exception& e) {
    if (opt.log) *opt.log << "pipeline: stage '" << stage << "' failed: " << e.what() << '\n';
}

/// Scene generation, scaffold baking, training, rendering and evaluation
/// under `out`:
///   scene/      dataset without priors
///   scene/priors/
///   train/      grid.nvsg, grid.nvsg.json, train_log.csv, config.cfg
///   render/<split>/
///   eval/       report_<split>.json
/// Each directory receives its manifest last, so a stage interrupted midway
/// leaves none and runs again next time. Stages whose manifest matches the
/// planned inputs are skipped.
inline RunManifest cmd_pipeline(const SceneSpec& spec, const TrainConfig& config, const fs::path& out,
                                const PipelineOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    config.validate();
    const fs::path scene_dir = out / "scene", priors_dir = scene_dir / "priors", train_dir = out / "train",
                   render_dir = out / "render", eval_dir = out / "eval";
    RunManifest top;
    top.stage = "pipeline";
    top.config = format_config(config);

    auto run_stage = [&](const std::string& name, const fs::path& dir, RunManifest planned,
                         const std::function<std::vector<std::string>()>& body) {
        if (stage_is_current(dir, planned)) {
            if (opt.log) *opt.log << "pipeline: " << name << " is up to date\n";
            top.outputs.push_back(fs::relative(dir, out).generic_string());
            return;
        }
        if (fs::exists(dir / kManifestName)) fs::remove(dir / kManifestName);
        if (opt.log) *opt.log << "pipeline: running " << name << '\n';
        const auto t0 = clock::now();
        try {
            fs::create_directories(dir);
            planned.outputs = body();
        } catch (const std::exception& e) {
            report_stage_failure(opt, name, e);
            throw;
        }
        const Real dt = std::chrono::duration<Real>(clock::now() - t0).count();
        planned.timings_s[name] = dt;
        top.timings_s[name] = dt;
        planned.save(dir);
        top.outputs.push_back(fs::relative(dir, out).generic_string());
    };

    const std::string spec_text = scene_spec_to_json(spec).dump();

    RunManifest m_scene;
    m_scene.stage = "scene";
    m_scene.config = spec_text;
    run_stage("scene", scene_dir, m_scene, [&] {
        const Dataset ds = generate_dataset(spec, opt.threads, opt.shadow_eps);
        save_dataset(scene_dir, ds, false);
        return std::vector<std::string>{"spec.json", "scaffold.obj", "cameras_train.json", "cameras_interp.json",
                                        "cameras_extrap.json", "gt/"};
    });

    RunManifest m_bake;
    m_bake.stage = "bake";
    m_bake.config = "shadow_eps = " + std::to_string(opt.shadow_eps);
    m_bake.inputs = {{"scaffold.obj", file_digest(scene_dir / "scaffold.obj")},
                     {"cameras_train.json", file_digest(scene_dir / "cameras_train.json")}};
    run_stage("bake", priors_dir, m_bake, [&] {
        const Scaffold scaffold{load_obj(scene_dir / "scaffold.obj")};
        const auto cams = load_cameras(scene_dir / "cameras_train.json");
        save_priors(priors_dir, bake_priors(scaffold, cams, opt.shadow_eps, opt.threads));
        return std::vector<std::string>{"dist_*.pfm", "cov_*.pfm"};
    });

    RunManifest m_train;
    m_train.stage = "train";
    m_train.config = format_config(config);
    m_train.inputs = directory_digests(scene_dir);
    run_stage("train", train_dir, m_train, [&] {
        const Dataset ds = load_dataset(scene_dir, true);
        const TrainResult tr = train(ds, config, opt.threads);
        save_checkpoint(train_dir / "grid.nvsg", tr.grid,
                        {{"tool_version", kToolVersion}, {"iterations", config.iterations}, {"seed", config.seed}});
        std::ofstream csv(train_dir / "train_log.csv");
        write_log_csv(csv, tr.log, config.log_every);
        std::ofstream cfg(train_dir / "config.cfg");
        cfg << format_config(config);
        return std::vector<std::string>{"grid.nvsg", "grid.nvsg.json", "train_log.csv", "config.cfg"};
    });

    RunManifest m_render;
    m_render.stage = "render";
    m_render.config = "n_samples_per_ray = " + std::to_string(config.n_samples);
    m_render.inputs = {{"grid.nvsg", file_digest(train_dir / "grid.nvsg")}};
    for (const auto& s : opt.eval_splits) m_render.inputs["cameras_" + s + ".json"] = file_digest(scene_dir / ("cameras_" + s + ".json"));
    run_stage("render", render_dir, m_render, [&] {
        const VoxelGrid grid = load_checkpoint(train_dir / "grid.nvsg");
        std::vector<std::string> outs;
        for (const auto& s : opt.eval_splits) {
            cmd_render(grid, load_cameras(scene_dir / ("cameras_" + s + ".json")), render_dir / s, config.n_samples,
                       config.near, opt.threads);
            outs.push_back(s + "/");
        }
        return outs;
    });

    RunManifest m_eval;
    m_eval.stage = "eval";
    m_eval.config = m_render.config;
    m_eval.inputs = directory_digests(render_dir);
    m_eval.inputs["grid.nvsg"] = file_digest(train_dir / "grid.nvsg");
    run_stage("eval", eval_dir, m_eval, [&] {
        const Dataset ds = load_dataset(scene_dir, false);
        const VoxelGrid grid = load_checkpoint(train_dir / "grid.nvsg");
        std::vector<std::string> outs;
        for (const auto& s : opt.eval_splits) {
            const EvalReport r = evaluate_split(grid, ds.split(s), s, config.n_samples, config.near, opt.threads);
            const std::string name = "report_" + s + ".json";
            write_json(eval_dir / name, r.to_json());
            outs.push_back(name);
        }
        return outs;
    });

    top.inputs = {{"spec", file_digest(scene_dir / "spec.json")}};
    top.save(out);
    return top;
}

}  // namespace nerfvs
