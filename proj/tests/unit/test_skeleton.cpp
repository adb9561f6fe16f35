#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "hfnerf/rng.hpp"
#include "hfnerf/skeleton.hpp"

using namespace hfnerf;

namespace {

// Dense 2D convolution with the product kernel and factored border
// renormalization: what two renormalized 1D passes must amount to.
std::vector<double> oracle_blur(const std::vector<double>& map, int width, int height,
                                double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    for (int i = -radius; i <= radius; ++i) {
        kernel[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    }
    double ksum = 0.0;
    for (double k : kernel) ksum += k;
    for (double& k : kernel) k /= ksum;

    std::vector<double> out(map.size(), 0.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0, wx_sum = 0.0, wy_sum = 0.0;
            for (int dx = -radius; dx <= radius; ++dx) {
                if (x + dx >= 0 && x + dx < width)
                    wx_sum += kernel[static_cast<std::size_t>(dx + radius)];
            }
            for (int dy = -radius; dy <= radius; ++dy) {
                if (y + dy >= 0 && y + dy < height)
                    wy_sum += kernel[static_cast<std::size_t>(dy + radius)];
            }
            for (int dy = -radius; dy <= radius; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= height) continue;
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int xx = x + dx;
                    if (xx < 0 || xx >= width) continue;
                    acc += kernel[static_cast<std::size_t>(dx + radius)] *
                           kernel[static_cast<std::size_t>(dy + radius)] *
                           map[static_cast<std::size_t>(yy) * width + xx];
                }
            }
            out[static_cast<std::size_t>(y) * width + x] = acc / (wx_sum * wy_sum);
        }
    }
    return out;
}

// Brute-force restatement of the detection rule, built on the oracle blur.
std::optional<JointDetection> oracle_extract(const std::vector<double>& channel, int width,
                                             int height, double sigma, double tau) {
    const std::vector<double> blurred = oracle_blur(channel, width, height, sigma);
    std::optional<JointDetection> best;
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            const std::size_t idx = static_cast<std::size_t>(v) * width + u;
            if (blurred[idx] < tau) continue;
            if (!best || channel[idx] > best->confidence) {
                best = JointDetection{u, v, channel[idx], true};
            }
        }
    }
    return best;
}

std::vector<double> random_channel(Rng& rng, int width, int height, double peak_prob) {
    std::vector<double> ch(static_cast<std::size_t>(width) * height);
    for (double& v : ch) v = rng.uniform(0.0, 0.25);
    if (rng.uniform() < peak_prob) {
        // Plant a blob so the mask is frequently nonempty.
        const int cu = static_cast<int>(rng.below(static_cast<std::uint64_t>(width)));
        const int cv = static_cast<int>(rng.below(static_cast<std::uint64_t>(height)));
        for (int v = 0; v < height; ++v) {
            for (int u = 0; u < width; ++u) {
                const double d2 = (u - cu) * (u - cu) + (v - cv) * (v - cv);
                ch[static_cast<std::size_t>(v) * width + u] += std::exp(-d2 / 8.0);
            }
        }
        for (double& v : ch) v = std::min(v, 1.0);
    }
    return ch;
}

}  // namespace

TEST_SUITE("skeleton") {

TEST_CASE("blur keeps constants constant") {
    const int w = 13, h = 9;
    std::vector<double> map(static_cast<std::size_t>(w) * h, 0.37);
    const auto out = gaussian_blur(map, w, h, 2.0);
    for (double v : out) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("blur of a centered impulse reproduces the separable kernel") {
    const int w = 9, h = 9;
    const double sigma = 1.0;
    std::vector<double> map(static_cast<std::size_t>(w) * h, 0.0);
    map[4 * 9 + 4] = 1.0;
    const auto out = gaussian_blur(map, w, h, sigma);

    const int radius = 3;  // ceil(3 * 1.0)
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) ksum += std::exp(-i * i / 2.0);
    auto k = [&](int i) { return std::exp(-i * i / 2.0) / ksum; };
    // Interior pixel: no border renormalization, value factorizes.
    CHECK(out[4 * 9 + 4] == doctest::Approx(k(0) * k(0)).epsilon(1e-12));
    CHECK(out[4 * 9 + 5] == doctest::Approx(k(1) * k(0)).epsilon(1e-12));
    CHECK(out[5 * 9 + 5] == doctest::Approx(k(1) * k(1)).epsilon(1e-12));
    CHECK(out[4 * 9 + 8] == doctest::Approx(0.0).epsilon(1e-12));  // dx = 4 > radius
    for (double v : out) CHECK(v >= 0.0);
}

TEST_CASE("separable blur equals a dense 2D convolution") {
    Rng rng(77);
    for (double sigma : {0.8, 1.5, 2.5}) {
        const int w = 17, h = 11;
        std::vector<double> map(static_cast<std::size_t>(w) * h);
        for (double& v : map) v = rng.uniform();
        const auto fast = gaussian_blur(map, w, h, sigma);
        const auto slow = oracle_blur(map, w, h, sigma);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("blur stays inside the input range") {
    Rng rng(3);
    std::vector<double> map(16 * 16);
    for (double& v : map) v = rng.uniform(0.2, 0.9);
    const auto out = gaussian_blur(map, 16, 16, 1.5);
    const auto [lo, hi] = std::minmax_element(map.begin(), map.end());
    for (double v : out) {
        CHECK(v >= *lo - 1e-12);
        CHECK(v <= *hi + 1e-12);
    }
}

TEST_CASE("blur rejects bad arguments") {
    std::vector<double> map(4, 0.0);
    CHECK_THROWS_AS(gaussian_blur(map, 2, 2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_blur(map, 2, 2, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_blur(map, 3, 2, 1.0), std::invalid_argument);  // size mismatch
}

TEST_CASE("extract_joint matches the brute-force rule on random channels") {
    Rng rng(123);
    int found = 0, absent = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int w = 16, h = 16;
        const auto ch = random_channel(rng, w, h, 0.7);
        const double tau = 0.30;
        const auto expected = oracle_extract(ch, w, h, 1.5, tau);
        const auto got = extract_joint(ch, w, h, 1.5, tau);
        REQUIRE(got.has_value() == expected.has_value());
        if (!got) {
            ++absent;
            continue;
        }
        ++found;
        CHECK(got->u == expected->u);
        CHECK(got->v == expected->v);
        CHECK(got->confidence == expected->confidence);
        CHECK(got->present);
    }
    CHECK(found >= 100);
    CHECK(absent >= 30);
}

TEST_CASE("mask ties go to the smallest (v, u)") {
    // Flat bright field: everything is in the mask, many equal maxima.
    const int w = 8, h = 8;
    std::vector<double> ch(static_cast<std::size_t>(w) * h, 0.8);
    SUBCASE("uniform channel picks the origin") {
        const auto got = extract_joint(ch, w, h, 1.0, 0.5);
        REQUIRE(got.has_value());
        CHECK(got->u == 0);
        CHECK(got->v == 0);
    }
    SUBCASE("two equal peaks, different rows") {
        ch[3 * 8 + 5] = 0.95;
        ch[6 * 8 + 1] = 0.95;
        const auto got = extract_joint(ch, w, h, 1.0, 0.5);
        REQUIRE(got.has_value());
        CHECK(got->v == 3);
        CHECK(got->u == 5);
    }
    SUBCASE("two equal peaks, same row") {
        ch[4 * 8 + 2] = 0.95;
        ch[4 * 8 + 6] = 0.95;
        const auto got = extract_joint(ch, w, h, 1.0, 0.5);
        REQUIRE(got.has_value());
        CHECK(got->v == 4);
        CHECK(got->u == 2);
    }
}

TEST_CASE("empty mask means absent") {
    std::vector<double> ch(64, 0.0);
    CHECK(!extract_joint(ch, 8, 8, 1.5, 0.3).has_value());
    std::vector<double> faint(64, 0.05);
    CHECK(!extract_joint(faint, 8, 8, 1.5, 0.3).has_value());
    CHECK_THROWS_AS(extract_joint(ch, 8, 8, 1.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(extract_joint(ch, 8, 8, 1.5, 1.0), std::invalid_argument);
}

TEST_CASE("extract_skeleton is per-channel and keeps connectivity") {
    Rng rng(5);
    HeatmapStack stack(3, 12, 12);
    for (double& v : stack.values) v = rng.uniform(0.0, 0.2);
    // One strong blob per channel at distinct spots.
    const int centers[3][2] = {{2, 3}, {9, 4}, {5, 10}};
    for (int k = 0; k < 3; ++k) {
        for (int y = 0; y < 12; ++y) {
            for (int x = 0; x < 12; ++x) {
                const double d2 = (x - centers[k][0]) * (x - centers[k][0]) +
                                  (y - centers[k][1]) * (y - centers[k][1]);
                stack.at(k, x, y) = std::min(1.0, stack.at(k, x, y) + std::exp(-d2 / 6.0));
            }
        }
    }
    const std::vector<std::pair<int, int>> bones = {{0, 1}, {1, 2}};
    const Skeleton2D skel = extract_skeleton(stack, bones);
    REQUIRE(skel.joints.size() == 3);
    CHECK(skel.bones == bones);
    for (int k = 0; k < 3; ++k) {
        CHECK(skel.joints[static_cast<std::size_t>(k)].present);
        CHECK(skel.joints[static_cast<std::size_t>(k)].u == centers[k][0]);
        CHECK(skel.joints[static_cast<std::size_t>(k)].v == centers[k][1]);
    }

    SUBCASE("permuting channels permutes detections") {
        HeatmapStack perm(3, 12, 12);
        const int order[3] = {2, 0, 1};  // perm channel k = stack channel order[k]
        for (int k = 0; k < 3; ++k) {
            std::copy(stack.channel(order[k]), stack.channel(order[k]) + 144, perm.channel(k));
        }
        const Skeleton2D skel2 = extract_skeleton(perm, {});
        for (int k = 0; k < 3; ++k) {
            CHECK(skel2.joints[static_cast<std::size_t>(k)].u ==
                  skel.joints[static_cast<std::size_t>(order[k])].u);
            CHECK(skel2.joints[static_cast<std::size_t>(k)].v ==
                  skel.joints[static_cast<std::size_t>(order[k])].v);
        }
    }
    SUBCASE("connectivity referencing missing joints throws") {
        CHECK_THROWS_AS(extract_skeleton(stack, {{0, 3}}), std::invalid_argument);
        CHECK_THROWS_AS(extract_skeleton(stack, {{-1, 0}}), std::invalid_argument);
    }
}

TEST_CASE("pck counts gt-present joints inside the radius") {
    auto joint = [](int u, int v, bool present) {
        return JointDetection{u, v, present ? 1.0 : 0.0, present};
    };
    Skeleton2D gt;
    gt.joints = {joint(10, 10, true), joint(20, 10, true), joint(10, 30, true),
                 joint(40, 40, true), joint(0, 0, false)};
    Skeleton2D pred;
    pred.joints = {joint(11, 10, true),   // off by 1
                   joint(20, 13, true),   // off by 3
                   joint(10, 30, true),   // exact
                   joint(48, 40, true),   // off by 8: outside 0.1 * 50
                   joint(5, 5, true)};    // gt absent, ignored
    // ref_scale 50 -> radius 5 at alpha 0.1: three of four present gt joints hit.
    CHECK(pck(pred, gt, 0.1, 50.0) == doctest::Approx(0.75).epsilon(1e-15));

    SUBCASE("absent predictions are misses") {
        pred.joints[2] = joint(0, 0, false);
        CHECK(pck(pred, gt, 0.1, 50.0) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("scaling coordinates and ref_scale together is invariant") {
        Skeleton2D gt2 = gt, pred2 = pred;
        for (auto* s : {&gt2, &pred2}) {
            for (auto& j : s->joints) {
                j.u *= 3;
                j.v *= 3;
            }
        }
        CHECK(pck(pred2, gt2, 0.1, 150.0) == pck(pred, gt, 0.1, 50.0));
    }
    SUBCASE("mismatched joint counts throw") {
        Skeleton2D small;
        small.joints = {joint(0, 0, true)};
        CHECK_THROWS_AS(pck(small, gt, 0.1, 50.0), std::invalid_argument);
        CHECK_THROWS_AS(pck(pred, gt, 0.1, 0.0), std::invalid_argument);
    }
    SUBCASE("no present gt joints means nothing to score") {
        Skeleton2D empty_gt = gt;
        for (auto& j : empty_gt.joints) j = joint(0, 0, false);
        CHECK(pck(pred, empty_gt, 0.1, 50.0) == 0.0);
    }
}

TEST_CASE("pck_ref_scale is the gt bounding-box diagonal") {
    Skeleton2D gt;
    gt.joints = {JointDetection{0, 0, 1.0, true}, JointDetection{3, 4, 1.0, true},
                 JointDetection{100, 100, 0.0, false}};  // absent joints ignored
    CHECK(pck_ref_scale(gt) == doctest::Approx(5.0).epsilon(1e-15));
    Skeleton2D nothing;
    nothing.joints = {JointDetection{0, 0, 0.0, false}};
    CHECK_THROWS_AS(pck_ref_scale(nothing), std::invalid_argument);
}

TEST_CASE("serializers produce parseable JSON and plausible SVG") {
    Skeleton2D skel;
    skel.joints = {JointDetection{3, 4, 0.9, true}, JointDetection{7, 2, 0.8, true},
                   JointDetection{0, 0, 0.0, false}};
    skel.bones = {{0, 1}, {1, 2}};

    const std::string js = skeleton_to_json(skel, 1.5, 0.3);
    const auto parsed = nlohmann::json::parse(js);
    CHECK(parsed["sigma_g"] == 1.5);
    CHECK(parsed["tau"] == 0.3);
    REQUIRE(parsed["joints"].size() == 3);
    CHECK(parsed["joints"][0]["u"] == 3);
    CHECK(parsed["joints"][2]["present"] == false);
    CHECK(parsed["bones"].size() == 2);

    const std::string svg = skeleton_to_svg(skel, 16, 16);
    CHECK(svg.find("<svg") != std::string::npos);
    // Only the 0-1 bone has both ends present; the absent joint draws nothing.
    std::size_t lines = 0, circles = 0;
    for (std::size_t pos = 0; (pos = svg.find("<line", pos)) != std::string::npos; ++pos) ++lines;
    for (std::size_t pos = 0; (pos = svg.find("<circle", pos)) != std::string::npos; ++pos) {
        ++circles;
    }
    CHECK(lines == 1);
    CHECK(circles == 2);
    CHECK(svg.find("<image") == std::string::npos);
    const std::string svg_img = skeleton_to_svg(skel, 16, 16, "view.png");
    CHECK(svg_img.find("<image") != std::string::npos);
    CHECK(svg_img.find("view.png") != std::string::npos);
}

}  // TEST_SUITE
