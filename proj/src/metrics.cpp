#include "hfnerf/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hfnerf {

double mse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("mse: sizes differ (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
    if (a.empty()) throw std::invalid_argument("mse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double mse(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) {
        throw std::invalid_argument("mse: image sizes differ");
    }
    return mse(a.pixels, b.pixels);
}

double mse(const HeatmapStack& a, const HeatmapStack& b) {
    if (a.K != b.K || a.width != b.width || a.height != b.height) {
        throw std::invalid_argument("mse: heatmap stack shapes differ");
    }
    return mse(a.values, b.values);
}

double psnr(const Image& a, const Image& b, double peak) {
    const double err = mse(a, b);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / err);
}

double psnr_json_value(double psnr_db) {
    return std::isinf(psnr_db) ? 1e9 : psnr_db;
}

double ssim(const Image& a, const Image& b, double peak) {
    constexpr int kWindow = 8;
    if (a.width != b.width || a.height != b.height) {
        throw std::invalid_argument("ssim: image sizes differ");
    }
    if (a.width < kWindow || a.height < kWindow) {
        throw std::invalid_argument("ssim: image smaller than the 8x8 window");
    }
    const auto luma = [](const Image& img, int x, int y) {
        return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
    };
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    const int wx = a.width / kWindow, wy = a.height / kWindow;
    constexpr double n = kWindow * kWindow;

    double total = 0.0;
    for (int by = 0; by < wy; ++by) {
        for (int bx = 0; bx < wx; ++bx) {
            double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
            for (int y = by * kWindow; y < (by + 1) * kWindow; ++y) {
                for (int x = bx * kWindow; x < (bx + 1) * kWindow; ++x) {
                    const double va = luma(a, x, y), vb = luma(b, x, y);
                    sa += va;
                    sb += vb;
                    saa += va * va;
                    sbb += vb * vb;
                    sab += va * vb;
                }
            }
            const double mu_a = sa / n, mu_b = sb / n;
            const double var_a = saa / n - mu_a * mu_a;
            const double var_b = sbb / n - mu_b * mu_b;
            const double cov = sab / n - mu_a * mu_b;
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
    }
    return total / (static_cast<double>(wx) * wy);
}

}  // namespace hfnerf
