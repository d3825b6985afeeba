// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nerfvs/scaffold.hpp"
#include "nerfvs/scene.hpp"

namespace nerfvs {

namespace fs = std::filesystem;

/// Cameras and ground truth for one split. Distance and coverage maps are
/// computed from the clean scene and are used only for evaluation.
struct SplitData {
    std::vector<CameraModel> cameras;
    std::vector<Image> images;
    std::vector<DistanceMap> gt_distance;
    std::vector<CoverageMap> gt_coverage;

    std::size_t size() const { return cameras.size(); }
};

/// Scaffold-derived supervision for the training views.
struct Priors {
    std::vector<DistanceMap> distance;
    std::vector<CoverageMap> coverage;
};

struct Dataset {
    SceneSpec spec;
    TriangleMesh scaffold;
    SplitData train, interp, extrap;
    Priors priors;

    const SplitData& split(const std::string& name) const {
        if (name == "train") return train;
        if (name == "interp") return interp;
        if (name == "extrap") return extrap;
        throw ConfigError("unknown split '" + name + "' (expected train, interp or extrap)");
    }
};

inline Priors bake_priors(const Scaffold& scaffold, const std::vector<CameraModel>& train_cameras,
                          Real eps = kDefaultShadowEps, int threads = 1) {
    Priors p;
    for (const auto& cam : train_cameras) p.distance.push_back(bake_distance_map(scaffold, cam, threads));
    for (const auto& cam : train_cameras)
        p.coverage.push_back(bake_coverage_map(scaffold, cam, train_cameras, p.distance, eps, threads));
    return p;
}

/// Number of hit pixels across the extrapolation views whose coverage is at
/// most `max_coverage`.
inline std::size_t count_low_coverage_pixels(const SplitData& split, int max_coverage) {
    std::size_t n = 0;
    for (std::size_t v = 0; v < split.size(); ++v)
        for (std::size_t i = 0; i < split.gt_coverage[v].values.size(); ++i)
            if (DistanceMap::is_hit(split.gt_distance[v].values.values[i]) &&
                split.gt_coverage[v].values.values[i] <= max_coverage)
                ++n;
    return n;
}

/// Renders ground truth for every split and bakes scaffold priors from the
/// clean mesh. Throws DataError when the camera layout leaves no
/// low-coverage extrapolation pixels.
inline Dataset generate_dataset(const SceneSpec& spec, int threads = 1, Real eps = kDefaultShadowEps) {
    Dataset ds;
    ds.spec = spec;
    const Scene scene = build_scene(spec);
    ds.scaffold = scene.mesh();
    const CameraSplits cams = make_trajectory(spec.trajectory);
    ds.priors = bake_priors(scene.scaffold(), cams.train, eps, threads);
    auto fill = [&](SplitData& split, const std::vector<CameraModel>& cameras) {
        split.cameras = cameras;
        for (const auto& cam : cameras) {
            split.images.push_back(quantize8(render_gt(scene, cam, threads)));
            split.gt_distance.push_back(bake_distance_map(scene.scaffold(), cam, threads));
            split.gt_coverage.push_back(bake_coverage_map(scene.scaffold(), cam, cams.train, ds.priors.distance, eps, threads));
        }
    };
    fill(ds.train, cams.train);
    fill(ds.interp, cams.interp);
    fill(ds.extrap, cams.extrap);
    if (count_low_coverage_pixels(ds.extrap, 2) == 0)
        throw DataError("camera layout produced no extrapolation pixels with coverage <= 2");
    return ds;
}

// --- camera JSON -------------------------------------------------------------

inline nlohmann::json cameras_to_json(const std::vector<CameraModel>& cams) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cams) {
        const auto m = c.cam_to_world();
        arr.push_back({{"fx", c.fx},
                       {"fy", c.fy},
                       {"cx", c.cx},
                       {"cy", c.cy},
                       {"width", c.width},
                       {"height", c.height},
                       {"cam_to_world", std::vector<Real>(m.begin(), m.end())}});
    }
    return arr;
}

inline std::vector<CameraModel> cameras_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw DataError("camera set must be a JSON array");
    std::vector<CameraModel> cams;
    try {
        for (const auto& r : j) {
            const auto m = r.at("cam_to_world").get<std::vector<Real>>();
            if (m.size() != 16) throw DataError("cam_to_world must hold 16 values");
            std::array<Real, 16> a{};
            std::copy(m.begin(), m.end(), a.begin());
            cams.push_back(CameraModel::from_matrix(r.at("fx").get<Real>(), r.at("fy").get<Real>(), r.at("cx").get<Real>(),
                                                    r.at("cy").get<Real>(), r.at("width").get<int>(),
                                                    r.at("height").get<int>(), a));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid camera record: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("invalid camera: ") + e.what());
    }
    return cams;
}

inline nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse " + path.string() + ": " + e.what());
    }
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

inline std::vector<CameraModel> load_cameras(const fs::path& path) { return cameras_from_json(read_json(path)); }

inline void save_cameras(const fs::path& path, const std::vector<CameraModel>& cams) {
    write_json(path, cameras_to_json(cams));
}

inline std::string index_name(std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04zu", i);
    return buf;
}

// --- dataset directory -------------------------------------------------------
//
//   cameras_{train,interp,extrap}.json
//   gt/<split>/<idx>.ppm          ground-truth image
//   gt/<split>/dist_<idx>.pfm     clean-scene distance (evaluation)
//   gt/<split>/cov_<idx>.pfm      clean-scene coverage w.r.t. training views (evaluation)
//   priors/dist_<idx>.pfm         scaffold distance map per training view
//   priors/cov_<idx>.pfm          scaffold coverage map per training view
//   scaffold.obj, spec.json

inline void save_priors(const fs::path& priors_dir, const Priors& p) {
    fs::create_directories(priors_dir);
    for (std::size_t i = 0; i < p.distance.size(); ++i)
        save_pfm(priors_dir / ("dist_" + index_name(i) + ".pfm"), p.distance[i].to_float());
    for (std::size_t i = 0; i < p.coverage.size(); ++i)
        save_pfm(priors_dir / ("cov_" + index_name(i) + ".pfm"), p.coverage[i].to_float());
}

inline Priors load_priors(const fs::path& priors_dir, std::size_t n_views) {
    Priors p;
    for (std::size_t i = 0; i < n_views; ++i) {
        p.distance.push_back(DistanceMap::from_float(load_pfm(priors_dir / ("dist_" + index_name(i) + ".pfm"))));
        p.coverage.push_back(CoverageMap::from_float(load_pfm(priors_dir / ("cov_" + index_name(i) + ".pfm"))));
    }
    return p;
}

inline void save_dataset(const fs::path& dir, const Dataset& ds, bool with_priors = true) {
    fs::create_directories(dir);
    write_json(dir / "spec.json", scene_spec_to_json(ds.spec));
    save_obj(dir / "scaffold.obj", ds.scaffold);
    const std::pair<const char*, const SplitData*> splits[] = {{"train", &ds.train}, {"interp", &ds.interp}, {"extrap", &ds.extrap}};
    for (const auto& [name, split] : splits) {
        save_cameras(dir / (std::string("cameras_") + name + ".json"), split->cameras);
        const fs::path gt = dir / "gt" / name;
        fs::create_directories(gt);
        for (std::size_t i = 0; i < split->size(); ++i) {
            save_ppm(gt / (index_name(i) + ".ppm"), split->images[i]);
            if (i < split->gt_distance.size()) save_pfm(gt / ("dist_" + index_name(i) + ".pfm"), split->gt_distance[i].to_float());
            if (i < split->gt_coverage.size()) save_pfm(gt / ("cov_" + index_name(i) + ".pfm"), split->gt_coverage[i].to_float());
        }
    }
    if (with_priors) save_priors(dir / "priors", ds.priors);
}

inline SplitData load_split(const fs::path& dir, const std::string& name) {
    SplitData s;
    s.cameras = load_cameras(dir / ("cameras_" + name + ".json"));
    const fs::path gt = dir / "gt" / name;
    for (std::size_t i = 0; i < s.cameras.size(); ++i) {
        s.images.push_back(load_ppm(gt / (index_name(i) + ".ppm")));
        if (s.images.back().width != s.cameras[i].width || s.images.back().height != s.cameras[i].height)
            throw DataError("image " + name + "/" + index_name(i) + " does not match its camera size");
        const fs::path dist = gt / ("dist_" + index_name(i) + ".pfm");
        if (fs::exists(dist)) s.gt_distance.push_back(DistanceMap::from_float(load_pfm(dist)));
        const fs::path cov = gt / ("cov_" + index_name(i) + ".pfm");
        if (fs::exists(cov)) s.gt_coverage.push_back(CoverageMap::from_float(load_pfm(cov)));
    }
    if (!s.gt_distance.empty() && s.gt_distance.size() != s.size()) throw DataError("incomplete distance maps for split " + name);
    if (!s.gt_coverage.empty() && s.gt_coverage.size() != s.size()) throw DataError("incomplete coverage maps for split " + name);
    return s;
}

inline Dataset load_dataset(const fs::path& dir, bool require_priors = true) {
    if (!fs::is_directory(dir)) throw DataError("dataset directory " + dir.string() + " does not exist");
    Dataset ds;
    if (fs::exists(dir / "spec.json")) ds.spec = scene_spec_from_json(read_json(dir / "spec.json"));
    ds.scaffold = load_obj(dir / "scaffold.obj");
    ds.train = load_split(dir, "train");
    ds.interp = load_split(dir, "interp");
    ds.extrap = load_split(dir, "extrap");
    if (require_priors || fs::exists(dir / "priors")) ds.priors = load_priors(dir / "priors", ds.train.size());
    for (std::size_t i = 0; i < ds.priors.distance.size(); ++i)
        if (ds.priors.distance[i].width() != ds.train.cameras[i].width ||
            ds.priors.distance[i].height() != ds.train.cameras[i].height)
            throw DataError("prior raster " + index_name(i) + " does not match its camera size");
    return ds;
}

}  // namespace nerfvs
