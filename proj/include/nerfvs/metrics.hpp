// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "nerfvs/errors.hpp"
#include "nerfvs/raster.hpp"
#include "nerfvs/scaffold.hpp"

namespace nerfvs {

inline constexpr Real kPsnrCap = 99.0;

inline Real psnr_from_mse(Real mse) { return mse <= 0 ? kPsnrCap : std::min(kPsnrCap, -10.0 * std::log10(mse)); }

inline void check_same_size(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) throw ContractError("images differ in size");
}

/// Peak 1.0; zero error reports the 99 dB cap.
inline Real psnr(const Image& pred, const Image& gt) {
    check_same_size(pred, gt);
    if (gt.data.empty()) throw ContractError("psnr of an empty image");
    Real se = 0;
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
        const Real d = pred.data[i] - gt.data[i];
        se += d * d;
    }
    return psnr_from_mse(se / static_cast<Real>(gt.data.size()));
}

inline Raster<Real> luminance(const Image& img) {
    Raster<Real> out(img.width, img.height, 0.0);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = (img.data[3 * i] + img.data[3 * i + 1] + img.data[3 * i + 2]) / 3.0;
    return out;
}

inline constexpr int kSsimWindow = 11;

inline std::array<Real, kSsimWindow> ssim_kernel_1d(Real sigma = 1.5) {
    std::array<Real, kSsimWindow> k{};
    Real sum = 0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const Real x = i - kSsimWindow / 2;
        k[i] = std::exp(-x * x / (2 * sigma * sigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

/// Gaussian-windowed SSIM on channel-mean luminance, averaged over every
/// window that lies fully inside the image.
inline Real ssim(const Image& pred, const Image& gt) {
    check_same_size(pred, gt);
    if (gt.width < kSsimWindow || gt.height < kSsimWindow) throw ContractError("image smaller than the SSIM window");
    constexpr Real c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr Real c2 = (0.03 * 1.0) * (0.03 * 1.0);
    const auto k = ssim_kernel_1d();
    const Raster<Real> a = luminance(pred), b = luminance(gt);
    const int w = gt.width, h = gt.height;
    const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;

    // Separable filtering of a, b, a^2, b^2, ab: rows first, then columns.
    std::array<std::vector<Real>, 5> rows;
    for (auto& r : rows) r.assign(static_cast<std::size_t>(ow) * h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            Real s[5] = {0, 0, 0, 0, 0};
            for (int i = 0; i < kSsimWindow; ++i) {
                const Real av = a(x + i, y), bv = b(x + i, y);
                s[0] += k[i] * av;
                s[1] += k[i] * bv;
                s[2] += k[i] * av * av;
                s[3] += k[i] * bv * bv;
                s[4] += k[i] * av * bv;
            }
            for (int c = 0; c < 5; ++c) rows[c][static_cast<std::size_t>(y) * ow + x] = s[c];
        }
    Real total = 0;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            Real s[5] = {0, 0, 0, 0, 0};
            for (int i = 0; i < kSsimWindow; ++i)
                for (int c = 0; c < 5; ++c) s[c] += k[i] * rows[c][static_cast<std::size_t>(y + i) * ow + x];
            const Real mu_a = s[0], mu_b = s[1];
            const Real var_a = s[2] - mu_a * mu_a, var_b = s[3] - mu_b * mu_b, cov = s[4] - mu_a * mu_b;
            total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
    return std::clamp(total / (static_cast<Real>(ow) * oh), -1.0, 1.0);
}

struct DepthError {
    Real rmse = 0;
    Real median_abs = 0;
    std::size_t count = 0;
};

/// Errors over pixels where `mask` is set. Throws ContractError on an empty mask.
inline DepthError depth_error(const Raster<Real>& pred, const Raster<Real>& gt, const std::vector<bool>& mask) {
    if (pred.width != gt.width || pred.height != gt.height || mask.size() != gt.values.size())
        throw ContractError("depth maps and mask differ in size");
    std::vector<Real> abs_err;
    Real se = 0;
    for (std::size_t i = 0; i < gt.values.size(); ++i) {
        if (!mask[i]) continue;
        const Real d = pred.values[i] - gt.values[i];
        se += d * d;
        abs_err.push_back(std::abs(d));
    }
    if (abs_err.empty()) throw ContractError("depth error over an empty mask");
    DepthError e;
    e.count = abs_err.size();
    e.rmse = std::sqrt(se / static_cast<Real>(e.count));
    std::sort(abs_err.begin(), abs_err.end());
    const std::size_t m = e.count / 2;
    e.median_abs = e.count % 2 ? abs_err[m] : 0.5 * (abs_err[m - 1] + abs_err[m]);
    return e;
}

/// Depth error against a ground-truth distance map, masked to its hits.
inline DepthError depth_error(const Raster<Real>& pred, const DistanceMap& gt) {
    std::vector<bool> mask(gt.values.values.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = DistanceMap::is_hit(gt.values.values[i]);
    return depth_error(pred, gt.values, mask);
}

// --- coverage bins -----------------------------------------------------------

struct CoverageBin {
    const char* label;
    int lo, hi;  // inclusive
};

inline constexpr std::array<CoverageBin, 4> kCoverageBins{{{"1-2", 1, 2}, {"3-5", 3, 5}, {"6-9", 6, 9}, {">9", 10, 1 << 30}}};

/// Index into kCoverageBins, or -1 for coverage below 1.
inline int coverage_bin(int coverage) {
    for (std::size_t b = 0; b < kCoverageBins.size(); ++b)
        if (coverage >= kCoverageBins[b].lo && coverage <= kCoverageBins[b].hi) return static_cast<int>(b);
    return -1;
}

/// Running per-bin squared error; pixels are pooled across views.
struct CoverageBinAccumulator {
    std::array<Real, kCoverageBins.size()> sq_err{};
    std::array<std::size_t, kCoverageBins.size()> pixels{};

    /// Adds every pixel whose coverage falls in a bin. Pixels with coverage
    /// 0 (unseen or misses) are skipped.
    void add(const Image& pred, const Image& gt, const CoverageMap& cov) {
        check_same_size(pred, gt);
        if (cov.width() != gt.width || cov.height() != gt.height) throw ContractError("coverage map size mismatch");
        for (std::size_t i = 0; i < cov.values.values.size(); ++i) {
            const int b = coverage_bin(cov.values.values[i]);
            if (b < 0) continue;
            for (int c = 0; c < 3; ++c) {
                const Real d = pred.data[3 * i + c] - gt.data[3 * i + c];
                sq_err[b] += d * d;
            }
            pixels[b] += 1;
        }
    }

    /// Bin label to PSNR; empty bins are omitted.
    std::map<std::string, Real> table() const {
        std::map<std::string, Real> out;
        for (std::size_t b = 0; b < kCoverageBins.size(); ++b)
            if (pixels[b] > 0) out[kCoverageBins[b].label] = psnr_from_mse(sq_err[b] / (3.0 * static_cast<Real>(pixels[b])));
        return out;
    }
};

inline std::map<std::string, Real> coverage_binned_psnr(const std::vector<Image>& pred, const std::vector<Image>& gt,
                                                        const std::vector<CoverageMap>& coverage) {
    if (pred.size() != gt.size() || gt.size() != coverage.size()) throw ContractError("view lists differ in length");
    CoverageBinAccumulator acc;
    for (std::size_t v = 0; v < gt.size(); ++v) acc.add(pred[v], gt[v], coverage[v]);
    return acc.table();
}

}  // namespace nerfvs
