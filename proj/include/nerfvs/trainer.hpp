// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nerfvs/adam.hpp"
#include "nerfvs/dataset.hpp"
#include "nerfvs/field_render.hpp"
#include "nerfvs/losses.hpp"
#include "nerfvs/voxel_grid.hpp"

namespace nerfvs {

struct TrainConfig {
    int iterations = 20000;
    int batch_rays = 1024;
    Real learning_rate = 1e-3;
    Real density_lr_scale = 1;  // multiplies learning_rate for raw density only
    AdamOptions adam;
    int n_samples = 128;
    Real relax_fraction = 0.10;
    std::uint64_t seed = 0;
    LossWeights weights;
    int grid_resolution = 64;
    int sh_degree = 1;
    Real near = kDefaultNear;
    int log_every = 100;

    int relax_iterations() const { return static_cast<int>(std::llround(iterations * relax_fraction)); }
    int regularized_iterations() const { return iterations - relax_iterations(); }

    void validate() const {
        if (iterations < 0) throw ConfigError("iterations must be nonnegative");
        if (batch_rays < 1) throw ConfigError("batch_rays must be at least 1");
        if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
        if (!(density_lr_scale > 0)) throw ConfigError("density_lr_scale must be positive");
        if (n_samples < 2) throw ConfigError("n_samples_per_ray must be at least 2");
        if (!(relax_fraction >= 0 && relax_fraction < 1)) throw ConfigError("relax_fraction must lie in [0, 1)");
        if (grid_resolution < 2) throw ConfigError("grid_resolution must be at least 2");
        if (sh_degree < 0 || sh_degree > kMaxShDegree) throw ConfigError("sh_degree must be 0, 1 or 2");
        if (!(near >= 0)) throw ConfigError("near must be nonnegative");
        if (log_every < 1) throw ConfigError("log_every must be at least 1");
        if (!(adam.beta1 >= 0 && adam.beta1 < 1) || !(adam.beta2 >= 0 && adam.beta2 < 1) || !(adam.eps > 0))
            throw ConfigError("invalid Adam hyper-parameters");
        weights.validate();
    }

    /// Photometric loss only, the plain radiance-field baseline.
    TrainConfig baseline() const {
        TrainConfig c = *this;
        c.weights.lambda_d = c.weights.lambda_w = c.weights.lambda_c = 0;
        return c;
    }
};

/// Desk-scale run: 64^3 grid, 3000 iterations, 96 samples per ray. The
/// grid needs a far larger step than an MLP, density most of all, and
/// lambda_d is raised so the depth term starts within an order of
/// magnitude of the photometric term.
inline TrainConfig desk_preset() {
    TrainConfig c;
    c.iterations = 3000;
    c.n_samples = 96;
    c.grid_resolution = 64;
    c.learning_rate = 0.05;
    c.density_lr_scale = 10;
    c.weights.lambda_d = 2;
    return c;
}

/// Fast end-to-end check: 16^3 grid, 300 iterations.
inline TrainConfig smoke_preset() {
    TrainConfig c = desk_preset();
    c.iterations = 300;
    c.grid_resolution = 16;
    c.n_samples = 48;
    c.batch_rays = 512;
    return c;
}

// --- key = value config files -----------------------------------------------

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

/// Applies one `key = value` setting. Throws ConfigError for unknown keys
/// or malformed values.
inline void apply_config_key(TrainConfig& c, const std::string& key, const std::string& value) {
    auto as_real = [&] {
        try {
            std::size_t used = 0;
            const Real r = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument("trailing");
            return r;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
        }
    };
    auto as_int = [&] {
        const Real r = as_real();
        if (r != std::floor(r)) throw ConfigError("key '" + key + "' expects an integer");
        return static_cast<long long>(r);
    };
    if (key == "preset") {
        if (value == "default")
            c = TrainConfig{};
        else if (value == "desk")
            c = desk_preset();
        else if (value == "smoke")
            c = smoke_preset();
        else
            throw ConfigError("unknown preset '" + value + "'");
    } else if (key == "iterations") c.iterations = static_cast<int>(as_int());
    else if (key == "batch_rays") c.batch_rays = static_cast<int>(as_int());
    else if (key == "learning_rate") c.learning_rate = as_real();
    else if (key == "density_lr_scale") c.density_lr_scale = as_real();
    else if (key == "adam_beta1") c.adam.beta1 = as_real();
    else if (key == "adam_beta2") c.adam.beta2 = as_real();
    else if (key == "adam_eps") c.adam.eps = as_real();
    else if (key == "n_samples_per_ray") c.n_samples = static_cast<int>(as_int());
    else if (key == "relax_fraction") c.relax_fraction = as_real();
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(as_int());
    else if (key == "beta") c.weights.beta = as_real();
    else if (key == "alpha") c.weights.alpha = as_real();
    else if (key == "lambda_max") c.weights.lambda_max = as_real();
    else if (key == "lambda_d") c.weights.lambda_d = as_real();
    else if (key == "lambda_w") c.weights.lambda_w = as_real();
    else if (key == "lambda_c") c.weights.lambda_c = as_real();
    else if (key == "depth_loss") {
        if (value == "robust") c.weights.depth_kind = DepthLossKind::Robust;
        else if (value == "l2") c.weights.depth_kind = DepthLossKind::L2;
        else throw ConfigError("depth_loss must be 'robust' or 'l2'");
    } else if (key == "coverage_adjustment") c.weights.coverage_adjustment = parse_bool(key, value);
    else if (key == "grid_resolution") c.grid_resolution = static_cast<int>(as_int());
    else if (key == "sh_degree") c.sh_degree = static_cast<int>(as_int());
    else if (key == "near") c.near = as_real();
    else if (key == "log_every") c.log_every = static_cast<int>(as_int());
    else throw ConfigError("unknown config key '" + key + "'");
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Parses `key = value` lines; '#' starts a comment. A `preset` line resets
/// every key, so it belongs at the top.
inline TrainConfig parse_config(std::istream& in, TrainConfig base = {}) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        apply_config_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    base.validate();
    return base;
}

inline TrainConfig load_config(const std::filesystem::path& path, TrainConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, base);
}

inline std::string format_config(const TrainConfig& c) {
    std::ostringstream o;
    o << std::setprecision(17);
    o << "iterations = " << c.iterations << '\n'
      << "batch_rays = " << c.batch_rays << '\n'
      << "learning_rate = " << c.learning_rate << '\n'
      << "density_lr_scale = " << c.density_lr_scale << '\n'
      << "adam_beta1 = " << c.adam.beta1 << '\n'
      << "adam_beta2 = " << c.adam.beta2 << '\n'
      << "adam_eps = " << c.adam.eps << '\n'
      << "n_samples_per_ray = " << c.n_samples << '\n'
      << "relax_fraction = " << c.relax_fraction << '\n'
      << "seed = " << c.seed << '\n'
      << "beta = " << c.weights.beta << '\n'
      << "alpha = " << c.weights.alpha << '\n'
      << "lambda_max = " << c.weights.lambda_max << '\n'
      << "lambda_d = " << c.weights.lambda_d << '\n'
      << "lambda_w = " << c.weights.lambda_w << '\n'
      << "lambda_c = " << c.weights.lambda_c << '\n'
      << "depth_loss = " << (c.weights.depth_kind == DepthLossKind::Robust ? "robust" : "l2") << '\n'
      << "coverage_adjustment = " << (c.weights.coverage_adjustment ? "true" : "false") << '\n'
      << "grid_resolution = " << c.grid_resolution << '\n'
      << "sh_degree = " << c.sh_degree << '\n'
      << "near = " << c.near << '\n'
      << "log_every = " << c.log_every << '\n';
    return o.str();
}

// --- batches -------------------------------------------------------------------

struct TrainingRay {
    Ray ray;
    RaySupervision sup;
    std::uint64_t jitter_seed = 0;
    std::uint32_t view = 0;
    std::uint32_t pixel = 0;  // y * width + x
};

/// Uniform draw over every pixel of every training view. Each ray carries
/// its ground-truth color and the scaffold prior of its own view.
inline std::vector<TrainingRay> sample_batch(const Dataset& ds, int batch_rays, std::mt19937_64& rng,
                                             Real near = kDefaultNear) {
    const auto& train = ds.train;
    if (train.size() == 0) throw DataError("dataset has no training views");
    std::vector<std::uint64_t> offsets(train.size() + 1, 0);
    for (std::size_t v = 0; v < train.size(); ++v) offsets[v + 1] = offsets[v] + train.images[v].pixel_count();
    const bool has_priors = ds.priors.distance.size() == train.size();
    std::uniform_int_distribution<std::uint64_t> pick(0, offsets.back() - 1);
    std::vector<TrainingRay> batch(static_cast<std::size_t>(batch_rays));
    for (auto& r : batch) {
        const std::uint64_t k = pick(rng);
        const auto v = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), k) - offsets.begin() - 1);
        const auto local = static_cast<std::uint32_t>(k - offsets[v]);
        const auto& cam = train.cameras[v];
        const int x = static_cast<int>(local % static_cast<std::uint32_t>(cam.width));
        const int y = static_cast<int>(local / static_cast<std::uint32_t>(cam.width));
        r.view = static_cast<std::uint32_t>(v);
        r.pixel = local;
        if (!scene_ray(cam, x + 0.5, y + 0.5, near, r.ray)) throw DataError("training camera sees nothing of the scene cube");
        r.sup.gt_color = train.images[v].pixel(x, y);
        if (has_priors) {
            const Real d = ds.priors.distance[v](x, y);
            if (DistanceMap::is_hit(d)) r.sup.prior_distance = d;
            r.sup.coverage = ds.priors.coverage[v](x, y);
        }
        r.jitter_seed = rng();
    }
    return batch;
}

// --- training loop ---------------------------------------------------------------

/// Batch means. The component columns are already multiplied by lambda(r)
/// and their loss weights, so total = color + depth + varw + varc.
struct TrainLogEntry {
    int iteration = 0;  // 1-based
    Real total = 0;
    Real color = 0;
    Real depth = 0;
    Real varw = 0;
    Real varc = 0;
    Real mean_lambda = 0;
    bool regularized = true;
};

inline void write_log_csv(std::ostream& out, const std::vector<TrainLogEntry>& log, int log_every) {
    out << "iter,L_total,L_color,L_depth,L_varw,L_varc,mean_lambda\n";
    out << std::setprecision(9);
    for (const auto& e : log) {
        if (e.iteration % log_every != 0 && e.iteration != static_cast<int>(log.size())) continue;
        out << e.iteration << ',' << e.total << ',' << e.color << ',' << e.depth << ',' << e.varw << ',' << e.varc << ','
            << e.mean_lambda << '\n';
    }
}

struct TrainHooks {
    /// Called once with the grid as it stands before the first relaxed step.
    std::function<void(int iteration, const VoxelGrid&)> on_relax_start;
    std::function<void(const TrainLogEntry&)> on_iteration;
};

struct TrainResult {
    VoxelGrid grid;
    std::vector<TrainLogEntry> log;
};

class Trainer {
public:
    Trainer(const Dataset& ds, TrainConfig config, int threads = 1)
        : ds_(ds), config_(std::move(config)), threads_(std::max(threads, 1)) {
        config_.validate();
        grid_ = init_grid(config_.grid_resolution, config_.sh_degree, config_.seed);
        adam_ = AdamState(grid_.parameter_count());
        grad_.assign(grid_.parameter_count(), 0.0);
        lr_scale_.assign(static_cast<std::size_t>(grid_.feature_count()), 1.0);
        lr_scale_[0] = config_.density_lr_scale;
        rng_.seed(config_.seed ^ 0x6a09e667f3bcc909ull);
    }

    const VoxelGrid& grid() const { return grid_; }
    VoxelGrid& grid() { return grid_; }
    const TrainConfig& config() const { return config_; }
    int iteration() const { return iteration_; }

    /// One optimizer step; regularizers are on until the relaxing stage.
    TrainLogEntry step() {
        const bool regularized = iteration_ < config_.regularized_iterations();
        const auto batch = sample_batch(ds_, config_.batch_rays, rng_, config_.near);
        const std::size_t n = static_cast<std::size_t>(config_.n_samples);
        const std::size_t nf = static_cast<std::size_t>(grid_.feature_count());
        const std::size_t nrec = batch.size() * n;
        cells_.resize(nrec);
        dfeat_.resize(nrec * nf);
        ray_losses_.resize(batch.size());
        const Real inv_batch = 1.0 / static_cast<Real>(batch.size());

        parallel_for(batch.size(), threads_, [&](std::size_t begin, std::size_t end, int) {
            RaySamples samples;
            std::vector<FieldEval> evals(n);
            std::vector<FieldSample> field(n);
            RayRenderResult result;
            SampleGrads sgrads;
            for (std::size_t r = begin; r < end; ++r) {
                const TrainingRay& tr = batch[r];
                SplitMix64 jitter(tr.jitter_seed);
                sample_ray_into(tr.ray, config_.n_samples, &jitter, samples);
                for (std::size_t i = 0; i < n; ++i) {
                    evals[i] = eval_field_full(grid_, samples.points[i], tr.ray.direction);
                    field[i] = evals[i].sample;
                }
                composite_into(samples, field, result);
                RayLoss loss = total_ray_loss(result, tr.sup, config_.weights, regularized);
                ray_losses_[r] = loss;
                RenderGrads g = loss.grads;
                g.color *= inv_batch;
                g.depth *= inv_batch;
                g.opacity *= inv_batch;
                g.weight_var *= inv_batch;
                g.color_var *= inv_batch;
                composite_backward_into(samples, field, result, g, sgrads);
                for (std::size_t i = 0; i < n; ++i) {
                    const Features df = field_backward(grid_, evals[i], sgrads.dsigma[i], sgrads.drgb[i]);
                    const std::size_t rec = r * n + i;
                    cells_[rec] = evals[i].cell;
                    std::copy_n(df.begin(), nf, dfeat_.begin() + static_cast<std::ptrdiff_t>(rec * nf));
                }
            }
        });

        TrainLogEntry e;
        e.iteration = iteration_ + 1;
        e.regularized = regularized;
        for (const auto& l : ray_losses_) {
            e.total += l.total;
            e.color += l.color;
            e.depth += l.depth;
            e.varw += l.varw;
            e.varc += l.varc;
            e.mean_lambda += l.lambda;
        }
        e.total *= inv_batch;
        e.color *= inv_batch;
        e.depth *= inv_batch;
        e.varw *= inv_batch;
        e.varc *= inv_batch;
        e.mean_lambda *= inv_batch;
        if (!std::isfinite(e.color)) throw DivergenceError("photometric loss became non-finite at iteration " + std::to_string(e.iteration));

        scatter_gradients(nf);
        adam_step(grid_.params(), grad_, adam_, config_.learning_rate, config_.adam, threads_, lr_scale_);
        parallel_for(grad_.size(), threads_, [&](std::size_t b, std::size_t en, int) {
            std::fill(grad_.begin() + static_cast<std::ptrdiff_t>(b), grad_.begin() + static_cast<std::ptrdiff_t>(en), 0.0);
        });
        ++iteration_;
        return e;
    }

private:
    /// Adds every sample's feature gradient into the grid buffer. Workers own
    /// disjoint z-slabs of vertices and each visits records in batch order,
    /// so every vertex sums its contributions in the same order for any
    /// worker count.
    void scatter_gradients(std::size_t nf) {
        const int res = grid_.resolution();
        parallel_for(static_cast<std::size_t>(res), threads_, [&](std::size_t z0, std::size_t z1, int) {
            const int zlo = static_cast<int>(z0), zhi = static_cast<int>(z1);
            for (std::size_t rec = 0; rec < cells_.size(); ++rec) {
                const GridCell& c = cells_[rec];
                if (c.iz + 1 < zlo || c.iz >= zhi) continue;
                const Real* df = &dfeat_[rec * nf];
                for (int dz = 0; dz < 2; ++dz) {
                    const int z = c.iz + dz;
                    if (z < zlo || z >= zhi) continue;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const Real w = c.weight(dx, dy, dz);
                            Real* dst = &grad_[grid_.vertex_index(c.ix + dx, c.iy + dy, z) * nf];
                            for (std::size_t f = 0; f < nf; ++f) dst[f] += w * df[f];
                        }
                }
            }
        });
    }

    const Dataset& ds_;
    TrainConfig config_;
    int threads_;
    VoxelGrid grid_;
    AdamState adam_;
    std::vector<Real> lr_scale_;
    std::vector<Real> grad_;
    std::mt19937_64 rng_;
    int iteration_ = 0;
    std::vector<GridCell> cells_;
    std::vector<Real> dfeat_;
    std::vector<RayLoss> ray_losses_;
};

inline TrainResult train(const Dataset& ds, const TrainConfig& config, int threads = 1, const TrainHooks& hooks = {}) {
    Trainer trainer(ds, config, threads);
    TrainResult out;
    out.log.reserve(static_cast<std::size_t>(config.iterations));
    for (int it = 0; it < config.iterations; ++it) {
        if (it == config.regularized_iterations() && hooks.on_relax_start) hooks.on_relax_start(it, trainer.grid());
        out.log.push_back(trainer.step());
        if (hooks.on_iteration) hooks.on_iteration(out.log.back());
    }
    out.grid = std::move(trainer.grid());
    return out;
}

}  // namespace nerfvs
