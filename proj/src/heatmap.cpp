#include "hfnerf/heatmap.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace hfnerf {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("heatmap file truncated: " + path);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_heatmaps(const std::string& path, const HeatmapStack& hm) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open heatmap file for writing: " + path);
    os.write("HFHEAT1\n", 8);
    put_u32(os, static_cast<std::uint32_t>(hm.K));
    put_u32(os, static_cast<std::uint32_t>(hm.width));
    put_u32(os, static_cast<std::uint32_t>(hm.height));
    for (double d : hm.values) {
        const std::uint32_t v = std::bit_cast<std::uint32_t>(static_cast<float>(d));
        char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 24)};
        os.write(b, 4);
    }
    if (!os) throw std::runtime_error("failed writing heatmap file: " + path);
}

HeatmapStack load_heatmaps(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open heatmap file: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::string(magic, 8) != "HFHEAT1\n") {
        throw std::runtime_error("not a heatmap file (bad magic): " + path);
    }
    const int K = static_cast<int>(get_u32(is, path));
    const int w = static_cast<int>(get_u32(is, path));
    const int h = static_cast<int>(get_u32(is, path));
    if (K <= 0 || w <= 0 || h <= 0) throw std::runtime_error("bad heatmap dimensions: " + path);
    HeatmapStack hm(K, w, h);
    for (auto& d : hm.values) d = std::bit_cast<float>(get_u32(is, path));
    return hm;
}

}  // namespace hfnerf
