#pragma once

#include <string>
#include <vector>

namespace hfnerf {

// RGB image, doubles in [0,1], row-major [height][width][3].
struct Image {
    int width = 0, height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0.0) {}

    double& at(int x, int y, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double at(int x, int y, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
};

// Format chosen by extension: ".png" needs libpng, anything else writes ASCII
// PPM (P3). Values clamp to [0,1] and quantize to 8 bits.
void write_image(const std::string& path, const Image& img);

// Sniffs the magic bytes: P3 / P6 PPM, or PNG when built with libpng.
Image load_image(const std::string& path);

}  // namespace hfnerf
