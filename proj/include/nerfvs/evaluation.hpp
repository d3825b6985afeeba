// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nerfvs/dataset.hpp"
#include "nerfvs/field_render.hpp"
#include "nerfvs/metrics.hpp"
#include "nerfvs/trainer.hpp"

namespace nerfvs {

struct ViewMetrics {
    Real psnr = 0;
    Real ssim = 0;
    bool has_depth = false;
    Real depth_rmse = 0;
    Real depth_median_abs = 0;
};

struct EvalReport {
    std::string split;
    std::vector<ViewMetrics> views;
    Real mean_psnr = 0;
    Real mean_ssim = 0;
    Real mean_depth_rmse = 0;          // over views with depth ground truth
    Real mean_depth_median_abs = 0;
    std::map<std::string, Real> coverage_psnr;  // bin label to pooled PSNR

    void finalize_means() {
        mean_psnr = mean_ssim = mean_depth_rmse = mean_depth_median_abs = 0;
        std::size_t with_depth = 0;
        for (const auto& v : views) {
            mean_psnr += v.psnr;
            mean_ssim += v.ssim;
            if (v.has_depth) {
                mean_depth_rmse += v.depth_rmse;
                mean_depth_median_abs += v.depth_median_abs;
                ++with_depth;
            }
        }
        if (!views.empty()) {
            mean_psnr /= static_cast<Real>(views.size());
            mean_ssim /= static_cast<Real>(views.size());
        }
        if (with_depth > 0) {
            mean_depth_rmse /= static_cast<Real>(with_depth);
            mean_depth_median_abs /= static_cast<Real>(with_depth);
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json per_view = nlohmann::json::array();
        for (std::size_t i = 0; i < views.size(); ++i) {
            nlohmann::json v = {{"view", i}, {"psnr", views[i].psnr}, {"ssim", views[i].ssim}};
            if (views[i].has_depth) {
                v["depth_rmse"] = views[i].depth_rmse;
                v["depth_median_abs"] = views[i].depth_median_abs;
            }
            per_view.push_back(v);
        }
        nlohmann::json j = {{"split", split},
                            {"views", per_view},
                            {"mean_psnr", mean_psnr},
                            {"mean_ssim", mean_ssim},
                            {"coverage_binned_psnr", coverage_psnr}};
        if (std::any_of(views.begin(), views.end(), [](const ViewMetrics& v) { return v.has_depth; })) {
            j["mean_depth_rmse"] = mean_depth_rmse;
            j["mean_depth_median_abs"] = mean_depth_median_abs;
        }
        return j;
    }
};

/// Renders every view of `split` with midpoint sampling and scores it.
/// Depth and coverage-binned metrics need the split's ground-truth maps.
inline EvalReport evaluate_split(const VoxelGrid& grid, const SplitData& split, const std::string& name, int n_samples,
                                 Real near = kDefaultNear, int threads = 1, std::vector<RenderedView>* renders = nullptr) {
    EvalReport report;
    report.split = name;
    CoverageBinAccumulator bins;
    const bool has_depth = split.gt_distance.size() == split.size();
    const bool has_cov = split.gt_coverage.size() == split.size();
    for (std::size_t v = 0; v < split.size(); ++v) {
        RenderedView r = render_view(grid, split.cameras[v], n_samples, near, threads);
        ViewMetrics m;
        m.psnr = psnr(r.color, split.images[v]);
        m.ssim = ssim(r.color, split.images[v]);
        if (has_depth) {
            const auto& gt = split.gt_distance[v];
            if (std::any_of(gt.values.values.begin(), gt.values.values.end(), DistanceMap::is_hit)) {
                const DepthError e = depth_error(r.depth, gt);
                m.has_depth = true;
                m.depth_rmse = e.rmse;
                m.depth_median_abs = e.median_abs;
            }
        }
        if (has_cov) bins.add(r.color, split.images[v], split.gt_coverage[v]);
        report.views.push_back(m);
        if (renders) renders->push_back(std::move(r));
    }
    report.finalize_means();
    report.coverage_psnr = bins.table();
    return report;
}

// --- ablation harness ----------------------------------------------------------

struct AblationVariant {
    std::string name;
    TrainConfig config;
};

/// The full method, three single-term removals, and the photometric-only
/// baseline, all sharing seed and budget.
inline std::vector<AblationVariant> ablation_variants(const TrainConfig& full) {
    std::vector<AblationVariant> out;
    out.push_back({"full", full});
    TrainConfig l2 = full;
    l2.weights.depth_kind = DepthLossKind::L2;
    out.push_back({"no_robust_depth", l2});
    TrainConfig novar = full;
    novar.weights.lambda_w = novar.weights.lambda_c = 0;
    out.push_back({"no_variance", novar});
    TrainConfig noadj = full;
    noadj.weights.coverage_adjustment = false;
    out.push_back({"no_adjustment", noadj});
    out.push_back({"baseline", full.baseline()});
    return out;
}

struct AblationResult {
    std::string name;
    EvalReport interp;
    EvalReport extrap;
    std::vector<Image> extrap_renders;
};

/// Places images left to right, top-aligned, on a black canvas.
inline Image hstack(const std::vector<const Image*>& images) {
    int w = 0, h = 0;
    for (const auto* im : images) {
        w += im->width;
        h = std::max(h, im->height);
    }
    Image out(w, h, 0.0);
    int x0 = 0;
    for (const auto* im : images) {
        for (int y = 0; y < im->height; ++y)
            for (int x = 0; x < im->width; ++x) out.set_pixel(x0 + x, y, im->pixel(x, y));
        x0 += im->width;
    }
    return out;
}

inline void write_ablation_csv(std::ostream& out, const std::vector<AblationResult>& results) {
    out << "variant,interp_psnr,interp_ssim,extrap_psnr,extrap_ssim,extrap_depth_rmse,extrap_depth_median_abs\n";
    out << std::setprecision(9);
    for (const auto& r : results)
        out << r.name << ',' << r.interp.mean_psnr << ',' << r.interp.mean_ssim << ',' << r.extrap.mean_psnr << ','
            << r.extrap.mean_ssim << ',' << r.extrap.mean_depth_rmse << ',' << r.extrap.mean_depth_median_abs << '\n';
}

/// Trains and evaluates every variant in turn. When `out_dir` is non-empty
/// writes ablation.csv, ablation.json and one PPM grid per extrapolation
/// view (ground truth, then variants in order).
inline std::vector<AblationResult> run_ablation(const Dataset& ds, const std::vector<AblationVariant>& variants,
                                                int threads = 1, const std::filesystem::path& out_dir = {}) {
    std::vector<AblationResult> results;
    for (const auto& v : variants) {
        const TrainResult tr = train(ds, v.config, threads);
        AblationResult r;
        r.name = v.name;
        r.interp = evaluate_split(tr.grid, ds.interp, "interp", v.config.n_samples, v.config.near, threads);
        std::vector<RenderedView> renders;
        r.extrap = evaluate_split(tr.grid, ds.extrap, "extrap", v.config.n_samples, v.config.near, threads, &renders);
        for (auto& rv : renders) r.extrap_renders.push_back(std::move(rv.color));
        results.push_back(std::move(r));
    }
    if (out_dir.empty()) return results;
    std::filesystem::create_directories(out_dir / "grids");
    {
        std::ofstream csv(out_dir / "ablation.csv");
        if (!csv) throw DataError("cannot write " + (out_dir / "ablation.csv").string());
        write_ablation_csv(csv, results);
    }
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : results) j.push_back({{"variant", r.name}, {"interp", r.interp.to_json()}, {"extrap", r.extrap.to_json()}});
    write_json(out_dir / "ablation.json", j);
    for (std::size_t view = 0; view < ds.extrap.size(); ++view) {
        std::vector<const Image*> row{&ds.extrap.images[view]};
        for (const auto& r : results) row.push_back(&r.extrap_renders[view]);
        save_ppm(out_dir / "grids" / ("extrap_" + index_name(view) + ".ppm"), hstack(row));
    }
    return results;
}

}  // namespace nerfvs
