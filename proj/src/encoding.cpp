#include "hfnerf/encoding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace hfnerf {

namespace {

// box-average downsample by integer factor; partial boxes average what exists
std::vector<double> box_down(const std::vector<double>& src, int w, int h, int factor, int& dw,
                             int& dh) {
    dw = (w + factor - 1) / factor;
    dh = (h + factor - 1) / factor;
    std::vector<double> out(static_cast<std::size_t>(dw) * dh * 3, 0.0);
    for (int by = 0; by < dh; ++by) {
        for (int bx = 0; bx < dw; ++bx) {
            const int x0 = bx * factor, y0 = by * factor;
            const int x1 = std::min(x0 + factor, w), y1 = std::min(y0 + factor, h);
            const double inv = 1.0 / ((x1 - x0) * (y1 - y0));
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        s += src[(static_cast<std::size_t>(y) * w + x) * 3 + c];
                out[(static_cast<std::size_t>(by) * dw + bx) * 3 + c] = s * inv;
            }
        }
    }
    return out;
}

// clamp-to-edge bilinear over a 3-channel grid, corner-frame coordinates
void bilinear3(const std::vector<double>& grid, int w, int h, double u, double v, double* out) {
    const double gx = u - 0.5, gy = v - 0.5;
    const double fx0 = std::floor(gx), fy0 = std::floor(gy);
    const double wx = gx - fx0, wy = gy - fy0;
    const int x0 = std::clamp(static_cast<int>(fx0), 0, w - 1);
    const int x1 = std::clamp(static_cast<int>(fx0) + 1, 0, w - 1);
    const int y0 = std::clamp(static_cast<int>(fy0), 0, h - 1);
    const int y1 = std::clamp(static_cast<int>(fy0) + 1, 0, h - 1);
    for (int c = 0; c < 3; ++c) {
        const double v00 = grid[(static_cast<std::size_t>(y0) * w + x0) * 3 + c];
        const double v10 = grid[(static_cast<std::size_t>(y0) * w + x1) * 3 + c];
        const double v01 = grid[(static_cast<std::size_t>(y1) * w + x0) * 3 + c];
        const double v11 = grid[(static_cast<std::size_t>(y1) * w + x1) * 3 + c];
        out[c] = (1.0 - wy) * ((1.0 - wx) * v00 + wx * v10) + wy * ((1.0 - wx) * v01 + wx * v11);
    }
}

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("feature map truncated: " + path);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

std::vector<double> positional_encode(const Vec3& p, int L) {
    if (L < 0) throw std::invalid_argument("positional_encode: negative band count");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(3 + 6 * L));
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
    double freq = std::numbers::pi;
    for (int l = 0; l < L; ++l) {
        out.push_back(std::sin(freq * p.x));
        out.push_back(std::sin(freq * p.y));
        out.push_back(std::sin(freq * p.z));
        out.push_back(std::cos(freq * p.x));
        out.push_back(std::cos(freq * p.y));
        out.push_back(std::cos(freq * p.z));
        freq *= 2.0;
    }
    return out;
}

FeatureMap builtin_pyramid_encoder(const Image& image) {
    if (image.width <= 0 || image.height <= 0) {
        throw std::invalid_argument("builtin_pyramid_encoder: empty image");
    }
    const int w = image.width, h = image.height;
    FeatureMap fm;
    fm.width = w;
    fm.height = h;
    fm.dim = 9;
    fm.values.assign(static_cast<std::size_t>(w) * h * 9, 0.0f);

    for (int level = 0; level < 2; ++level) {
        const int factor = level == 0 ? 4 : 16;
        int dw = 0, dh = 0;
        const auto small = box_down(image.pixels, w, h, factor, dw, dh);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double rgb[3];
                bilinear3(small, dw, dh, (x + 0.5) / factor, (y + 0.5) / factor, rgb);
                float* t = fm.values.data() + (static_cast<std::size_t>(y) * w + x) * 9;
                for (int c = 0; c < 3; ++c) t[3 + 3 * level + c] = static_cast<float>(rgb[c]);
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float* t = fm.values.data() + (static_cast<std::size_t>(y) * w + x) * 9;
            for (int c = 0; c < 3; ++c) t[c] = static_cast<float>(image.at(x, y, c));
        }
    }
    return fm;
}

std::vector<double> sample_feature(const FeatureMap& fm, double u, double v) {
    std::vector<double> out(static_cast<std::size_t>(fm.dim), 0.0);
    if (!(u >= 0.0 && u <= fm.width && v >= 0.0 && v <= fm.height)) return out;
    const double gx = u - 0.5, gy = v - 0.5;
    const double fx0 = std::floor(gx), fy0 = std::floor(gy);
    const double wx = gx - fx0, wy = gy - fy0;
    const int x0 = std::clamp(static_cast<int>(fx0), 0, fm.width - 1);
    const int x1 = std::clamp(static_cast<int>(fx0) + 1, 0, fm.width - 1);
    const int y0 = std::clamp(static_cast<int>(fy0), 0, fm.height - 1);
    const int y1 = std::clamp(static_cast<int>(fy0) + 1, 0, fm.height - 1);
    const float* t00 = fm.texel(x0, y0);
    const float* t10 = fm.texel(x1, y0);
    const float* t01 = fm.texel(x0, y1);
    const float* t11 = fm.texel(x1, y1);
    for (int c = 0; c < fm.dim; ++c) {
        out[static_cast<std::size_t>(c)] = (1.0 - wy) * ((1.0 - wx) * t00[c] + wx * t10[c]) +
                                           wy * ((1.0 - wx) * t01[c] + wx * t11[c]);
    }
    return out;
}

std::vector<double> point_feature(const Vec3& x, const Camera& source_cam, const FeatureMap& fm) {
    const auto proj = project(source_cam, x);
    if (!proj) return std::vector<double>(static_cast<std::size_t>(fm.dim), 0.0);
    // projected pixel-index coords -> corner frame
    return sample_feature(fm, proj->u + 0.5, proj->v + 0.5);
}

void save_feature_map(const std::string& path, const FeatureMap& fm) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open feature map for writing: " + path);
    os.write("HFFEAT1\n", 8);
    put_u32(os, static_cast<std::uint32_t>(fm.width));
    put_u32(os, static_cast<std::uint32_t>(fm.height));
    put_u32(os, static_cast<std::uint32_t>(fm.dim));
    for (float f : fm.values) {
        const std::uint32_t v = std::bit_cast<std::uint32_t>(f);
        char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 24)};
        os.write(b, 4);
    }
    if (!os) throw std::runtime_error("failed writing feature map: " + path);
}

FeatureMap load_feature_map(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open feature map: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::string(magic, 8) != "HFFEAT1\n") {
        throw std::runtime_error("not a feature map file (bad magic): " + path);
    }
    FeatureMap fm;
    fm.width = static_cast<int>(get_u32(is, path));
    fm.height = static_cast<int>(get_u32(is, path));
    fm.dim = static_cast<int>(get_u32(is, path));
    if (fm.width <= 0 || fm.height <= 0 || fm.dim <= 0) {
        throw std::runtime_error("bad feature map dimensions: " + path);
    }
    const std::size_t n = static_cast<std::size_t>(fm.width) * fm.height * fm.dim;
    fm.values.resize(n);
    for (auto& f : fm.values) {
        f = std::bit_cast<float>(get_u32(is, path));
    }
    return fm;
}

}  // namespace hfnerf
