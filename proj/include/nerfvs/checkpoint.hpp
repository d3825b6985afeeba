// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "nerfvs/errors.hpp"
#include "nerfvs/raster.hpp"
#include "nerfvs/voxel_grid.hpp"

namespace nerfvs {

// Layout (little-endian): "NVSG", u32 version, u32 R, u32 L,
// f32 raw_density[R^3], f32 sh[R^3][3][(L+1)^2]. Vertex order is x fastest.
inline constexpr char kCheckpointMagic[4] = {'N', 'V', 'S', 'G'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::vector<char>& buf, std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) v = byteswap32(v);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf.insert(buf.end(), p, p + 4);
}

inline void put_f32(std::vector<char>& buf, Real x) { put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(x))); }

inline std::uint32_t get_u32(const std::vector<char>& buf, std::size_t& pos) {
    if (pos + 4 > buf.size()) throw DataError("checkpoint is truncated");
    std::uint32_t v;
    std::memcpy(&v, buf.data() + pos, 4);
    pos += 4;
    if constexpr (std::endian::native == std::endian::big) v = byteswap32(v);
    return v;
}

}  // namespace detail

inline std::vector<char> encode_checkpoint(const VoxelGrid& grid) {
    std::vector<char> buf(kCheckpointMagic, kCheckpointMagic + 4);
    detail::put_u32(buf, kCheckpointVersion);
    detail::put_u32(buf, static_cast<std::uint32_t>(grid.resolution()));
    detail::put_u32(buf, static_cast<std::uint32_t>(grid.sh_degree()));
    const std::size_t nv = grid.vertex_count();
    buf.reserve(buf.size() + grid.parameter_count() * 4);
    for (std::size_t v = 0; v < nv; ++v) detail::put_f32(buf, grid.raw_density(v));
    for (std::size_t v = 0; v < nv; ++v)
        for (int c = 0; c < 3; ++c)
            for (int b = 0; b < grid.basis_count(); ++b) detail::put_f32(buf, grid.sh(v, c, b));
    return buf;
}

inline VoxelGrid decode_checkpoint(const std::vector<char>& buf) {
    if (buf.size() < 16 || std::memcmp(buf.data(), kCheckpointMagic, 4) != 0) throw DataError("not a grid checkpoint");
    std::size_t pos = 4;
    const auto version = detail::get_u32(buf, pos);
    if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
    const auto res = detail::get_u32(buf, pos);
    const auto deg = detail::get_u32(buf, pos);
    if (res < 2 || res > 1024 || deg > static_cast<std::uint32_t>(kMaxShDegree)) throw DataError("checkpoint header is corrupt");
    VoxelGrid grid(static_cast<int>(res), static_cast<int>(deg));
    if (buf.size() != 16 + grid.parameter_count() * 4) throw DataError("checkpoint size does not match its header");
    auto next = [&] {
        const float f = std::bit_cast<float>(detail::get_u32(buf, pos));
        if (!std::isfinite(f)) throw DataError("checkpoint holds a non-finite parameter");
        return static_cast<Real>(f);
    };
    const std::size_t nv = grid.vertex_count();
    for (std::size_t v = 0; v < nv; ++v) grid.raw_density(v) = next();
    for (std::size_t v = 0; v < nv; ++v)
        for (int c = 0; c < 3; ++c)
            for (int b = 0; b < grid.basis_count(); ++b) grid.sh(v, c, b) = next();
    return grid;
}

/// Writes `path` and the metadata sidecar `path` + ".json".
inline void save_checkpoint(const std::filesystem::path& path, const VoxelGrid& grid, const nlohmann::json& metadata) {
    const auto buf = encode_checkpoint(grid);
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path.string());
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    std::ofstream meta(path.string() + ".json");
    if (!meta) throw DataError("cannot write checkpoint metadata");
    meta << metadata.dump(2) << '\n';
}

inline VoxelGrid load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(buf);
}

}  // namespace nerfvs
