#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hfnerf/ops.hpp"
#include "hfnerf/rendering.hpp"
#include "hfnerf/rng.hpp"

using namespace hfnerf;

namespace {

// Independent compositing oracle: explicit transmittance product, no
// running-state shortcuts shared with the implementation.
struct OracleResult {
    std::vector<double> out;
    double opacity = 0.0;
    std::vector<double> weights;
};

OracleResult oracle_composite(const std::vector<double>& sigmas, const std::vector<double>& deltas,
                              const std::vector<double>& values, int M) {
    const std::size_t n = sigmas.size();
    OracleResult r;
    r.out.assign(static_cast<std::size_t>(M), 0.0);
    r.weights.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double T = 1.0;
        for (std::size_t j = 0; j < i; ++j) T *= std::exp(-sigmas[j] * deltas[j]);
        const double alpha = 1.0 - std::exp(-sigmas[i] * deltas[i]);
        r.weights[i] = T * alpha;
        r.opacity += r.weights[i];
        for (int m = 0; m < M; ++m) {
            r.out[static_cast<std::size_t>(m)] += r.weights[i] * values[i * M + m];
        }
    }
    return r;
}

struct RenderFixture {
    FieldParams params;
    Camera cam;
    FeatureMap features;
    RenderSource source;

    explicit RenderFixture(std::uint64_t seed) {
        FieldConfig cfg;
        cfg.trunk_width = 16;
        cfg.trunk_depth = 3;
        cfg.skip_at = 1;
        cfg.head_width = 8;
        cfg.K = 2;
        cfg.L_x = 2;
        cfg.L_d = 1;
        cfg.F_dim = 3;
        params = field_init(cfg, seed);

        cam.fx = cam.fy = 8.0;
        cam.cx = cam.cy = 4.0;
        cam.width = cam.height = 8;
        cam.cam_to_world = look_at({0.0, 0.0, 2.5}, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0});

        features.width = features.height = 8;
        features.dim = 3;
        features.values.resize(8 * 8 * 3);
        Rng rng(seed + 1);
        for (auto& v : features.values) v = static_cast<float>(rng.uniform(0.0, 1.0));

        source.camera = cam;
        source.features = &features;
    }
};

}  // namespace

TEST_SUITE("rendering") {

TEST_CASE("composite matches the transmittance-product oracle") {
    Rng rng(601);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 16, M = 5;
        std::vector<double> sigmas, deltas, values;
        for (int i = 0; i < n; ++i) {
            sigmas.push_back(rng.uniform(0.0, 4.0));
            deltas.push_back(rng.uniform(0.01, 0.4));
        }
        for (int i = 0; i < n * M; ++i) values.push_back(rng.uniform(-1.0, 1.0));
        const CompositeResult got = composite(sigmas, deltas, values, M);
        const OracleResult want = oracle_composite(sigmas, deltas, values, M);
        REQUIRE(got.weights.size() == want.weights.size());
        for (int i = 0; i < n; ++i) CHECK(got.weights[i] == doctest::Approx(want.weights[i]).epsilon(1e-12));
        CHECK(got.opacity == doctest::Approx(want.opacity).epsilon(1e-12));
        for (int m = 0; m < M; ++m) CHECK(got.out[m] == doctest::Approx(want.out[m]).epsilon(1e-12));
        CHECK(got.opacity <= 1.0 + 1e-12);
    }
}

TEST_CASE("composite analytic anchor points") {
    // zero density: nothing accumulates
    auto r = composite({0.0, 0.0}, {0.5, 0.5}, {1.0, 2.0}, 1);
    CHECK(r.opacity == 0.0);
    CHECK(r.out[0] == 0.0);

    // one sample, sigma*delta = ln 2: alpha = 1/2
    r = composite({std::log(2.0)}, {1.0}, {0.8}, 1);
    CHECK(r.opacity == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.out[0] == doctest::Approx(0.4).epsilon(1e-15));

    // wall at the first sample: later samples get no weight
    r = composite({1e4, 3.0}, {1.0, 1.0}, {0.25, 0.75}, 1);
    CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.weights[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.out[0] == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(composite({-0.1}, {1.0}, {0.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(composite({1.0}, {0.0}, {0.0}, 1), std::invalid_argument);
    CHECK_THROWS_AS(composite({1.0}, {1.0}, {0.0}, 2), std::invalid_argument);
}

TEST_CASE("batched compositing equals per-ray compositing plus white background") {
    Rng rng(602);
    const int R = 4, S = 6, M = 5;  // 3 color + 2 heat channels
    std::vector<double> sig, val, deltas;
    for (int i = 0; i < R * S; ++i) sig.push_back(rng.uniform(0.0, 3.0));
    for (int i = 0; i < R * S * M; ++i) val.push_back(rng.uniform(0.0, 1.0));
    for (int i = 0; i < R * S; ++i) deltas.push_back(rng.uniform(0.05, 0.3));

    const auto sigma_t = ad::Tensor::from_values({R * S, 1}, sig);
    const auto values_t = ad::Tensor::from_values({R * S, M}, val);
    const ad::Tensor out = composite_rays(sigma_t, values_t, deltas, S);
    REQUIRE(out.rank() == 2);
    REQUIRE(out.dim(0) == R);
    REQUIRE(out.dim(1) == M + 1);

    for (int r = 0; r < R; ++r) {
        const std::vector<double> rs(sig.begin() + r * S, sig.begin() + (r + 1) * S);
        const std::vector<double> rv(val.begin() + r * S * M, val.begin() + (r + 1) * S * M);
        const std::vector<double> rd(deltas.begin() + r * S, deltas.begin() + (r + 1) * S);
        const OracleResult want = oracle_composite(rs, rd, rv, M);
        const double* row = out.values().data() + static_cast<std::size_t>(r) * (M + 1);
        for (int m = 0; m < 3; ++m) {
            CHECK(row[m] == doctest::Approx(want.out[m] + (1.0 - want.opacity)).epsilon(1e-12));
        }
        for (int m = 3; m < M; ++m) CHECK(row[m] == doctest::Approx(want.out[m]).epsilon(1e-12));
        CHECK(row[M] == doctest::Approx(want.opacity).epsilon(1e-12));
    }
}

TEST_CASE("compositing gradients match central differences") {
    Rng rng(603);
    const int R = 2, S = 5, M = 4;
    std::vector<double> sig, val, deltas, coeff;
    for (int i = 0; i < R * S; ++i) sig.push_back(rng.uniform(0.1, 2.0));
    for (int i = 0; i < R * S * M; ++i) val.push_back(rng.uniform(-0.5, 1.0));
    for (int i = 0; i < R * S; ++i) deltas.push_back(rng.uniform(0.05, 0.3));
    for (int i = 0; i < R * (M + 1); ++i) coeff.push_back(rng.uniform(-1.0, 1.0));

    auto sigma_t = ad::Tensor::from_values({R * S, 1}, sig, true);
    auto values_t = ad::Tensor::from_values({R * S, M}, val, true);
    const auto coeff_t = ad::Tensor::from_values({R, M + 1}, coeff);

    const auto loss_of = [&]() {
        return ad::sum(ad::mul(composite_rays(sigma_t, values_t, deltas, S), coeff_t));
    };

    std::vector<double> g_sigma, g_values;
    {
        ad::TapeScope scope;
        ad::backward(loss_of());
        g_sigma = sigma_t.grad();
        g_values = values_t.grad();
    }
    REQUIRE(g_sigma.size() == sig.size());
    REQUIRE(g_values.size() == val.size());

    const double h = 1e-5;
    const auto fd_check = [&](ad::Tensor& t, const std::vector<double>& analytic) {
        for (std::size_t j = 0; j < t.values().size(); ++j) {
            const double saved = t.values()[j];
            t.values()[j] = saved + h;
            const double up = loss_of().values()[0];
            t.values()[j] = saved - h;
            const double dn = loss_of().values()[0];
            t.values()[j] = saved;
            const double fd = (up - dn) / (2 * h);
            const bool ok = std::abs(analytic[j] - fd) < 1e-6 ||
                            std::abs(analytic[j] - fd) /
                                    std::max(std::abs(analytic[j]), std::abs(fd)) <
                                1e-4;
            CHECK_MESSAGE(ok, "entry ", j, " analytic ", analytic[j], " fd ", fd);
        }
    };
    fd_check(sigma_t, g_sigma);
    fd_check(values_t, g_values);
}

TEST_CASE("near-vacuum field renders white; a wall renders the field color") {
    RenderFixture fx(604);
    Ray ray = ray_for_pixel(fx.cam, 3.7, 4.2, 1.2, 3.8);

    // push density to ~0: softplus(-40) ~ 4e-18
    fx.params.sigma_b.values()[0] = -40.0;
    RenderedPixel px = render_ray(fx.params, ray, fx.source, 16, false, 0);
    CHECK(px.color.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(px.color.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(px.color.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(px.opacity == doctest::Approx(0.0).epsilon(1e-12));
    REQUIRE(px.heat.size() == 2);
    for (double hch : px.heat) CHECK(hch == doctest::Approx(0.0).epsilon(1e-12));

    // saturate density: the first sample absorbs the whole ray, so the pixel
    // equals that sample's head outputs
    fx.params.sigma_b.values()[0] = 1e4;
    px = render_ray(fx.params, ray, fx.source, 16, false, 0);
    CHECK(px.opacity == doctest::Approx(1.0).epsilon(1e-12));
    const auto samples = stratified_samples(ray, 16, false, 0);
    const Vec3 x0 = ray.origin + samples[0].t * ray.direction;
    EncodedPoint enc;
    enc.gamma_x = positional_encode(x0, fx.params.cfg.L_x);
    enc.gamma_d = positional_encode(ray.direction, fx.params.cfg.L_d);
    enc.feature = point_feature(x0, fx.source.camera, *fx.source.features);
    const FieldOutput fo = field_forward(fx.params, enc);
    CHECK(px.color.x == doctest::Approx(fo.color.x).epsilon(1e-9));
    CHECK(px.color.y == doctest::Approx(fo.color.y).epsilon(1e-9));
    CHECK(px.color.z == doctest::Approx(fo.color.z).epsilon(1e-9));
    for (std::size_t k = 0; k < px.heat.size(); ++k) {
        const double want = 1.0 / (1.0 + std::exp(-fo.heatmap_logits[k]));
        CHECK(px.heat[k] == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("every image pixel equals a standalone single-ray render") {
    const RenderFixture fx(605);
    const int S = 8;
    const double near = 1.2, far = 3.8;
    const RenderedImage img = render_image(fx.params, fx.cam, fx.source, S, near, far);
    REQUIRE(img.image.width == fx.cam.width);
    REQUIRE(img.image.height == fx.cam.height);
    REQUIRE(img.heat.K == 2);
    for (int v = 0; v < fx.cam.height; ++v) {
        for (int u = 0; u < fx.cam.width; ++u) {
            const Ray ray = ray_for_pixel(fx.cam, u, v, near, far);
            const RenderedPixel px = render_ray(fx.params, ray, fx.source, S, false, 0);
            CHECK(img.image.at(u, v, 0) == px.color.x);
            CHECK(img.image.at(u, v, 1) == px.color.y);
            CHECK(img.image.at(u, v, 2) == px.color.z);
            CHECK(img.heat.at(0, u, v) == px.heat[0]);
            CHECK(img.heat.at(1, u, v) == px.heat[1]);
            CHECK(img.opacity[static_cast<std::size_t>(v) * fx.cam.width + u] == px.opacity);
        }
    }
}

TEST_CASE("render_image is bitwise independent of the ray chunk size") {
    const RenderFixture fx(606);
    const RenderedImage a = render_image(fx.params, fx.cam, fx.source, 6, 1.2, 3.8, 3);
    const RenderedImage b = render_image(fx.params, fx.cam, fx.source, 6, 1.2, 3.8, 1024);
    REQUIRE(a.image.pixels.size() == b.image.pixels.size());
    for (std::size_t i = 0; i < a.image.pixels.size(); ++i) {
        CHECK(a.image.pixels[i] == b.image.pixels[i]);
    }
    for (std::size_t i = 0; i < a.heat.values.size(); ++i) {
        CHECK(a.heat.values[i] == b.heat.values[i]);
    }
    for (std::size_t i = 0; i < a.opacity.size(); ++i) CHECK(a.opacity[i] == b.opacity[i]);
}

TEST_CASE("jittered rendering is deterministic per seed") {
    const RenderFixture fx(607);
    const Ray ray = ray_for_pixel(fx.cam, 4.0, 4.0, 1.2, 3.8);
    const RenderedPixel a = render_ray(fx.params, ray, fx.source, 12, true, 13);
    const RenderedPixel b = render_ray(fx.params, ray, fx.source, 12, true, 13);
    const RenderedPixel c = render_ray(fx.params, ray, fx.source, 12, true, 14);
    CHECK(a.color.x == b.color.x);
    CHECK(a.color.y == b.color.y);
    CHECK(a.color.z == b.color.z);
    CHECK(a.opacity == b.opacity);
    CHECK(a.color.x != c.color.x);
}

}  // TEST_SUITE
