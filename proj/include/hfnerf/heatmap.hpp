#pragma once

#include <string>
#include <vector>

namespace hfnerf {

// K-channel heatmap over image pixels, values in [0,1], stored [K][height][width].
struct HeatmapStack {
    int K = 0, width = 0, height = 0;
    std::vector<double> values;

    HeatmapStack() = default;
    HeatmapStack(int k, int w, int h)
        : K(k), width(w), height(h), values(static_cast<std::size_t>(k) * w * h, 0.0) {}

    double& at(int k, int x, int y) {
        return values[(static_cast<std::size_t>(k) * height + y) * width + x];
    }
    double at(int k, int x, int y) const {
        return values[(static_cast<std::size_t>(k) * height + y) * width + x];
    }
    double* channel(int k) { return values.data() + static_cast<std::size_t>(k) * width * height; }
    const double* channel(int k) const {
        return values.data() + static_cast<std::size_t>(k) * width * height;
    }
};

// File layout: magic "HFHEAT1\n", u32 K/width/height, row-major f32 values per
// channel, little-endian throughout.
void save_heatmaps(const std::string& path, const HeatmapStack& hm);
HeatmapStack load_heatmaps(const std::string& path);

}  // namespace hfnerf
