#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "hfnerf/metrics.hpp"
#include "hfnerf/rng.hpp"

using namespace hfnerf;

namespace {

Image random_image(Rng& rng, int w, int h) {
    Image img(w, h);
    for (double& v : img.pixels) v = rng.uniform();
    return img;
}

Image constant_image(int w, int h, double value) {
    Image img(w, h);
    for (double& v : img.pixels) v = value;
    return img;
}

double luma(const Image& img, int x, int y) {
    return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
}

// Straight-line restatement: per non-overlapping 8x8 window, population
// moments of the luma values, then the SSIM ratio.
double oracle_ssim(const Image& a, const Image& b, double peak) {
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    double total = 0.0;
    int windows = 0;
    for (int wy = 0; wy + 8 <= a.height; wy += 8) {
        for (int wx = 0; wx + 8 <= a.width; wx += 8) {
            std::vector<double> xs, ys;
            for (int y = wy; y < wy + 8; ++y) {
                for (int x = wx; x < wx + 8; ++x) {
                    xs.push_back(luma(a, x, y));
                    ys.push_back(luma(b, x, y));
                }
            }
            double mx = 0.0, my = 0.0;
            for (std::size_t i = 0; i < 64; ++i) {
                mx += xs[i];
                my += ys[i];
            }
            mx /= 64.0;
            my /= 64.0;
            double vx = 0.0, vy = 0.0, cov = 0.0;
            for (std::size_t i = 0; i < 64; ++i) {
                vx += (xs[i] - mx) * (xs[i] - mx);
                vy += (ys[i] - my) * (ys[i] - my);
                cov += (xs[i] - mx) * (ys[i] - my);
            }
            vx /= 64.0;
            vy /= 64.0;
            cov /= 64.0;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++windows;
        }
    }
    return total / windows;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("mse basics and loop oracle") {
    CHECK(mse(std::vector<double>{1.0, 2.0, 3.0}, std::vector<double>{1.0, 2.0, 3.0}) == 0.0);
    CHECK(mse(std::vector<double>(10, 0.0), std::vector<double>(10, 0.1)) ==
          doctest::Approx(0.01).epsilon(1e-15));

    Rng rng(17);
    std::vector<double> a(257), b(257);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.uniform(-2.0, 2.0);
        b[i] = rng.uniform(-2.0, 2.0);
    }
    double expected = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) expected += (a[i] - b[i]) * (a[i] - b[i]);
    expected /= static_cast<double>(a.size());
    CHECK(mse(a, b) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(mse(a, b) == mse(b, a));

    CHECK_THROWS_AS(mse(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("mse overloads agree with the flat buffers") {
    Rng rng(18);
    Image ia = random_image(rng, 6, 5), ib = random_image(rng, 6, 5);
    CHECK(mse(ia, ib) == mse(ia.pixels, ib.pixels));

    HeatmapStack ha(3, 4, 4), hb(3, 4, 4);
    for (double& v : ha.values) v = rng.uniform();
    for (double& v : hb.values) v = rng.uniform();
    CHECK(mse(ha, hb) == mse(ha.values, hb.values));

    Image wrong(5, 5);
    CHECK_THROWS_AS(mse(ia, wrong), std::invalid_argument);
    HeatmapStack wrong_k(2, 4, 4);
    CHECK_THROWS_AS(mse(ha, wrong_k), std::invalid_argument);
}

TEST_CASE("psnr closed forms") {
    Rng rng(19);
    const Image img = random_image(rng, 8, 8);
    CHECK(psnr(img, img) == std::numeric_limits<double>::infinity());
    CHECK(psnr_json_value(psnr(img, img)) == 1e9);
    CHECK(psnr_json_value(42.5) == 42.5);

    // A uniform 0.1 error has mse 0.01: psnr = 10 log10(1 / 0.01) = 20 dB.
    const Image a = constant_image(8, 8, 0.4);
    const Image b = constant_image(8, 8, 0.5);
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr(a, b) == psnr(b, a));
    // Doubling peak adds 20 log10(2) dB.
    CHECK(psnr(a, b, 2.0) == doctest::Approx(20.0 + 20.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("ssim of an image with itself is exactly 1") {
    Rng rng(20);
    const Image img = random_image(rng, 16, 16);
    CHECK(ssim(img, img) == 1.0);
}

TEST_CASE("ssim of constant images has a closed form") {
    const Image a = constant_image(8, 8, 0.2);
    const Image b = constant_image(8, 8, 0.8);
    // Zero variance: ssim = (2 mx my + C1) C2 / ((mx^2 + my^2 + C1) C2).
    const double c1 = 1e-4;
    const double expected = (2.0 * 0.2 * 0.8 + c1) / (0.2 * 0.2 + 0.8 * 0.8 + c1);
    CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ssim matches the per-window oracle") {
    Rng rng(21);
    for (const auto [w, h] : {std::pair{8, 8}, std::pair{16, 24}, std::pair{33, 17}}) {
        const Image a = random_image(rng, w, h);
        Image b = a;
        for (double& v : b.pixels) v = std::clamp(v + rng.uniform(-0.2, 0.2), 0.0, 1.0);
        CHECK(ssim(a, b) == doctest::Approx(oracle_ssim(a, b, 1.0)).epsilon(1e-10));
        CHECK(ssim(a, b) == ssim(b, a));
    }
}

TEST_CASE("ssim ignores trailing partial windows") {
    Rng rng(22);
    const Image big_a = random_image(rng, 12, 12);
    const Image big_b = random_image(rng, 12, 12);
    Image crop_a(8, 8), crop_b(8, 8);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            for (int c = 0; c < 3; ++c) {
                crop_a.at(x, y, c) = big_a.at(x, y, c);
                crop_b.at(x, y, c) = big_b.at(x, y, c);
            }
        }
    }
    CHECK(ssim(big_a, big_b) == ssim(crop_a, crop_b));
}

TEST_CASE("ssim rejects undersized or mismatched images") {
    CHECK_THROWS_AS(ssim(Image(7, 8), Image(7, 8)), std::invalid_argument);
    CHECK_THROWS_AS(ssim(Image(8, 8), Image(8, 9)), std::invalid_argument);
}

}  // TEST_SUITE
