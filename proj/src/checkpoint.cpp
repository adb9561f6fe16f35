#include "hfnerf/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace hfnerf::ad {

namespace {

constexpr char kMagic[] = "HFNERF1\n";
constexpr std::size_t kMagicLen = 8;

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    os.write(b, 4);
}

void put_f64(std::ostream& os, double d) {
    const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
    os.write(b, 8);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("checkpoint truncated: " + path);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) {
        throw std::runtime_error("checkpoint truncated: " + path);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

}  // namespace

void save_checkpoint(const std::string& path, const NamedParams& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write(kMagic, kMagicLen);
    for (const auto& [name, t] : params) {
        put_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<std::uint32_t>(t.shape().size()));
        for (int d : t.shape()) put_u32(os, static_cast<std::uint32_t>(d));
        for (double v : t.values()) put_f64(os, v);
    }
    if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

NamedParams load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[kMagicLen];
    if (!is.read(magic, kMagicLen) || std::string(magic, kMagicLen) != kMagic) {
        throw std::runtime_error("not a checkpoint file (bad magic): " + path);
    }
    NamedParams params;
    while (true) {
        is.peek();
        if (is.eof()) break;
        const std::uint32_t name_len = get_u32(is, path);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) {
            throw std::runtime_error("checkpoint truncated: " + path);
        }
        const std::uint32_t rank = get_u32(is, path);
        std::vector<int> shape(rank);
        std::int64_t count = 1;
        for (auto& d : shape) {
            d = static_cast<int>(get_u32(is, path));
            count *= d;
        }
        std::vector<double> values(static_cast<std::size_t>(count));
        for (auto& v : values) v = get_f64(is, path);
        params.emplace_back(std::move(name), Tensor::from_values(std::move(shape), std::move(values)));
    }
    return params;
}

}  // namespace hfnerf::ad
