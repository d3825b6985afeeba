// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "nerfvs/errors.hpp"
#include "nerfvs/renderer.hpp"

namespace nerfvs {

enum class DepthLossKind { Robust, L2 };

struct LossWeights {
    Real beta = 0.1;        // knee of the robust depth loss
    Real alpha = 9.0;       // coverage above which no extra regularization is applied
    Real lambda_max = 5.0;  // multiplier for rays seen by a single view
    Real lambda_d = 0.1;
    Real lambda_w = 0.01;
    Real lambda_c = 0.01;
    DepthLossKind depth_kind = DepthLossKind::Robust;
    bool coverage_adjustment = true;  // false: lambda(r) = 1 for every ray

    void validate() const {
        if (!(beta > 0)) throw ConfigError("beta must be positive");
        if (!(alpha > 1)) throw ConfigError("alpha must exceed 1");
        if (!(lambda_max >= 1)) throw ConfigError("lambda_max must be at least 1");
        if (!(lambda_d >= 0) || !(lambda_w >= 0) || !(lambda_c >= 0))
            throw ConfigError("loss weights must be nonnegative");
    }
};

/// Supervision attached to one training ray.
struct RaySupervision {
    Vec3 gt_color;
    std::optional<Real> prior_distance;  // absent where the scaffold ray misses
    int coverage = 0;
};

struct ScalarGrad {
    Real value = 0;
    Real grad = 0;
};

struct ColorLoss {
    Real value = 0;
    Vec3 grad;
};

inline ColorLoss photometric_loss(const Vec3& pred, const Vec3& gt) {
    const Vec3 d = pred - gt;
    return {dot(d, d), d * 2.0};
}

/// 0.5 x^2 below the knee and a logarithmic tail above it; C1 at the knee.
inline ScalarGrad robust_depth_loss(Real pred, Real prior, Real beta) {
    const Real diff = pred - prior;
    const Real delta = std::abs(diff);
    const Real sign = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
    if (delta < beta) return {0.5 * delta * delta, diff};
    return {beta * beta * (0.5 + std::log(delta / beta)), sign * beta * beta / delta};
}

inline ScalarGrad l2_depth_loss(Real pred, Real prior) {
    const Real diff = pred - prior;
    return {0.5 * diff * diff, diff};
}

/// Regularization multiplier for a ray observed by `coverage` training views.
inline Real coverage_weight(Real coverage, Real alpha, Real lambda_max) {
    if (coverage > alpha) return 1.0;
    return 1.0 + (lambda_max - 1.0) / (alpha - 1.0) * (alpha - coverage);
}

/// Multiplier actually applied to a training ray: scaffold misses count as
/// a single observation.
inline Real ray_lambda(const RaySupervision& sup, const LossWeights& w) {
    if (!w.coverage_adjustment) return 1.0;
    return coverage_weight(std::max(sup.coverage, 1), w.alpha, w.lambda_max);
}

/// Per-ray loss value split into its weighted components, plus gradients
/// w.r.t. the renderer outputs.
struct RayLoss {
    Real total = 0;
    Real color = 0;
    Real depth = 0;  // lambda(r) * lambda_d * depth term
    Real varw = 0;   // lambda(r) * lambda_w * weight variance
    Real varc = 0;   // lambda(r) * lambda_c * color variance
    Real lambda = 1;
    RenderGrads grads;
};

inline RayLoss total_ray_loss(const RayRenderResult& r, const RaySupervision& sup, const LossWeights& w,
                              bool regularizers_enabled) {
    RayLoss out;
    const auto pc = photometric_loss(r.color, sup.gt_color);
    out.color = pc.value;
    out.grads.color = pc.grad;
    out.lambda = ray_lambda(sup, w);
    if (regularizers_enabled) {
        const Real lam = out.lambda;
        if (sup.prior_distance && w.lambda_d > 0) {
            const auto d = w.depth_kind == DepthLossKind::Robust
                               ? robust_depth_loss(r.depth, *sup.prior_distance, w.beta)
                               : l2_depth_loss(r.depth, *sup.prior_distance);
            out.depth = lam * w.lambda_d * d.value;
            out.grads.depth = lam * w.lambda_d * d.grad;
        }
        out.varw = lam * w.lambda_w * r.weight_var;
        out.grads.weight_var = lam * w.lambda_w;
        out.varc = lam * w.lambda_c * r.color_var;
        out.grads.color_var = lam * w.lambda_c;
    }
    out.total = out.color + out.depth + out.varw + out.varc;
    return out;
}

}  // namespace nerfvs
