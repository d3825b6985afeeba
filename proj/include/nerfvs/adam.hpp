// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "nerfvs/errors.hpp"
#include "nerfvs/parallel.hpp"
#include "nerfvs/vec.hpp"

namespace nerfvs {

struct AdamOptions {
    Real beta1 = 0.9;
    Real beta2 = 0.999;
    Real eps = 1e-8;
};

struct AdamState {
    std::int64_t step = 0;
    std::vector<Real> m;
    std::vector<Real> v;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update. Elementwise, so the result does not
/// depend on the worker count. For interleaved layouts `lr_scale` gives a
/// per-slot multiplier: element i uses lr * lr_scale[i % lr_scale.size()].
inline void adam_step(std::span<Real> params, std::span<const Real> grads, AdamState& state, Real lr,
                      const AdamOptions& opt = {}, int threads = 1, std::span<const Real> lr_scale = {}) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw ConfigError("Adam buffers do not match the parameter count");
    const std::size_t period = lr_scale.size();
    state.step += 1;
    const Real c1 = 1 - std::pow(opt.beta1, static_cast<Real>(state.step));
    const Real c2 = 1 - std::pow(opt.beta2, static_cast<Real>(state.step));
    const Real step_size = lr / c1;
    const Real inv_sqrt_c2 = 1 / std::sqrt(c2);
    Real* m = state.m.data();
    Real* v = state.v.data();
    Real* p = params.data();
    const Real* g = grads.data();
    parallel_for(params.size(), threads, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t i = begin; i < end; ++i) {
            const Real gi = g[i];
            // Parameters that have never received a gradient stay untouched.
            if (gi == 0 && m[i] == 0 && v[i] == 0) continue;
            m[i] = opt.beta1 * m[i] + (1 - opt.beta1) * gi;
            v[i] = opt.beta2 * v[i] + (1 - opt.beta2) * gi * gi;
            const Real scale = period ? lr_scale[i % period] : 1;
            p[i] -= scale * step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + opt.eps);
        }
    });
}

}  // namespace nerfvs
