// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "nerfvs/errors.hpp"
#include "nerfvs/vec.hpp"

namespace nerfvs {

/// Row-major H x W single-channel raster; row 0 is the top image row.
template <typename T>
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<T> values;

    Raster() = default;
    Raster(int w, int h, T fill = T{}) : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    T& operator()(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    const T& operator()(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return values.size(); }
    bool operator==(const Raster&) const = default;
};

/// Row-major H x W RGB image with channel values nominally in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Real> data;  // (y * width + x) * 3 + c

    Image() = default;
    Image(int w, int h, Real fill = 0) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

    Vec3 pixel(int x, int y) const {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        return {data[i], data[i + 1], data[i + 2]};
    }
    void set_pixel(int x, int y, const Vec3& c) {
        const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
        data[i] = c.x;
        data[i + 1] = c.y;
        data[i + 2] = c.z;
    }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
};

inline std::uint32_t byteswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

inline std::uint8_t to_byte(Real v) {
    const Real c = std::clamp(v, Real(0), Real(1));
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

/// Binary 8-bit PPM (P6).
inline void write_ppm(std::ostream& out, const Image& img) {
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<std::uint8_t> bytes(img.data.size());
    std::transform(img.data.begin(), img.data.end(), bytes.begin(), to_byte);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void save_ppm(const std::filesystem::path& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_ppm(out, img);
}

inline constexpr int kMaxRasterSide = 1 << 15;

inline Image read_ppm(std::istream& in) {
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (!in || magic != "P6" || w <= 0 || h <= 0 || w > kMaxRasterSide || h > kMaxRasterSide || maxval != 255)
        throw DataError("unsupported PPM header");
    in.get();
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw DataError("truncated PPM data");
    Image img(w, h);
    for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0;
    return img;
}

inline Image load_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_ppm(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

/// Portable float map, single channel ("Pf"), little-endian, rows stored
/// bottom-up.
inline void write_pfm(std::ostream& out, const Raster<float>& r) {
    out << "Pf\n" << r.width << ' ' << r.height << "\n-1.0\n";
    std::vector<char> row(static_cast<std::size_t>(r.width) * 4);
    for (int y = r.height - 1; y >= 0; --y) {
        for (int x = 0; x < r.width; ++x) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(r(x, y));
            if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
            std::memcpy(row.data() + x * 4, &bits, 4);
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

inline void save_pfm(const std::filesystem::path& path, const Raster<float>& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_pfm(out, r);
}

inline Raster<float> read_pfm(std::istream& in) {
    std::string magic;
    int w = 0, h = 0;
    double scale = 0;
    in >> magic >> w >> h >> scale;
    if (!in || magic != "Pf" || w <= 0 || h <= 0 || w > kMaxRasterSide || h > kMaxRasterSide || scale == 0)
        throw DataError("unsupported PFM header");
    in.get();
    const bool file_little = scale < 0;
    const bool swap = file_little != (std::endian::native == std::endian::little);
    Raster<float> r(w, h);
    std::vector<char> row(static_cast<std::size_t>(w) * 4);
    for (int y = h - 1; y >= 0; --y) {
        in.read(row.data(), static_cast<std::streamsize>(row.size()));
        if (!in) throw DataError("truncated PFM data");
        for (int x = 0; x < w; ++x) {
            std::uint32_t bits;
            std::memcpy(&bits, row.data() + x * 4, 4);
            if (swap) bits = byteswap32(bits);
            r(x, y) = std::bit_cast<float>(bits);
        }
    }
    return r;
}

inline Raster<float> load_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_pfm(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace nerfvs
