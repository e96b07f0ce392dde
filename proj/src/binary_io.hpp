#pragma once

// Little-endian helpers shared by the GMDF and GMSF readers/writers.

#include "gmind/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace gmind::detail {

inline void put_u32(std::vector<unsigned char> &out, uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
    }
}

inline void put_f32(std::vector<unsigned char> &out, double v) {
    put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
}

inline uint32_t get_u32(std::span<const unsigned char> in, size_t offset) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<uint32_t>(in[offset + static_cast<size_t>(i)]) << (8 * i);
    }
    return v;
}

inline double get_f32(std::span<const unsigned char> in, size_t offset) {
    return static_cast<double>(std::bit_cast<float>(get_u32(in, offset)));
}

inline std::vector<unsigned char> read_file(const std::filesystem::path &path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::missing_file, "no such file: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path &path, std::span<const unsigned char> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::io_error, "write failed: " + path.string());
    }
}

// Writes magic + version + dims + planes.
inline void write_planes(const std::filesystem::path &path, const char (&magic)[5], uint32_t width,
                         uint32_t height, std::initializer_list<std::span<const double>> planes) {
    std::vector<unsigned char> bytes;
    bytes.insert(bytes.end(), magic, magic + 4);
    bytes.push_back(0x01);
    put_u32(bytes, width);
    put_u32(bytes, height);
    for (auto plane : planes) {
        for (double v : plane) {
            put_f32(bytes, v);
        }
    }
    write_file(path, bytes);
}

struct PlaneFile {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<std::vector<double>> planes;
};

inline PlaneFile read_planes(const std::filesystem::path &path, const char (&magic)[5], int plane_count) {
    const auto bytes = read_file(path);
    constexpr size_t header = 13;
    if (bytes.size() < header || std::memcmp(bytes.data(), magic, 4) != 0) {
        throw Error(ErrorCode::unsupported_format, std::string("not a ") + magic + " file: " + path.string());
    }
    if (bytes[4] != 0x01) {
        throw Error(ErrorCode::unsupported_format,
                    "unsupported " + std::string(magic) + " version " + std::to_string(bytes[4]));
    }
    PlaneFile f;
    f.width = get_u32(bytes, 5);
    f.height = get_u32(bytes, 9);
    const uint64_t n = static_cast<uint64_t>(f.width) * f.height;
    if (f.width == 0 || f.height == 0 || bytes.size() != header + n * 4u * static_cast<uint64_t>(plane_count)) {
        throw Error(ErrorCode::unsupported_format, "corrupt " + std::string(magic) + " file: " + path.string());
    }
    size_t offset = header;
    for (int p = 0; p < plane_count; ++p) {
        std::vector<double> plane(static_cast<size_t>(n));
        for (auto &v : plane) {
            v = get_f32(bytes, offset);
            offset += 4;
        }
        f.planes.push_back(std::move(plane));
    }
    return f;
}

} // namespace gmind::detail
