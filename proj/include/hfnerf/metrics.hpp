#pragma once

#include <vector>

#include "hfnerf/heatmap.hpp"
#include "hfnerf/image.hpp"

namespace hfnerf {

// Mean squared difference over all elements. Shapes must match exactly.
double mse(const std::vector<double>& a, const std::vector<double>& b);
double mse(const Image& a, const Image& b);
double mse(const HeatmapStack& a, const HeatmapStack& b);

// 10 log10(peak^2 / mse); identical inputs give +infinity (callers writing
// JSON substitute the 1e9 sentinel, see psnr_json_value).
double psnr(const Image& a, const Image& b, double peak = 1.0);
double psnr_json_value(double psnr_db);  // +inf -> 1e9, for JSON serialization

// Mean SSIM over non-overlapping 8x8 windows of the luma channel
// (0.299 R + 0.587 G + 0.114 B), population statistics,
// C1 = (0.01 peak)^2, C2 = (0.03 peak)^2. Trailing partial windows are
// ignored; images must be at least one window wide and tall.
double ssim(const Image& a, const Image& b, double peak = 1.0);

}  // namespace hfnerf
