#include "hfnerf/rendering.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hfnerf/ops.hpp"
#include "hfnerf/rng.hpp"

namespace hfnerf {

CompositeResult composite(const std::vector<double>& sigmas, const std::vector<double>& deltas,
                          const std::vector<double>& values, int M) {
    const std::size_t n = sigmas.size();
    if (deltas.size() != n || values.size() != n * static_cast<std::size_t>(M)) {
        throw std::invalid_argument("composite: " + std::to_string(n) + " sigmas vs " +
                                    std::to_string(deltas.size()) + " deltas vs " +
                                    std::to_string(values.size()) + " values for M=" +
                                    std::to_string(M));
    }
    CompositeResult res;
    res.out.assign(static_cast<std::size_t>(M), 0.0);
    res.weights.assign(n, 0.0);
    double transmittance = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (sigmas[i] < 0.0) throw std::invalid_argument("composite: negative sigma");
        if (deltas[i] <= 0.0) throw std::invalid_argument("composite: non-positive delta");
        const double decay = std::exp(-sigmas[i] * deltas[i]);
        const double alpha = 1.0 - decay;
        const double w = transmittance * alpha;
        res.weights[i] = w;
        for (int m = 0; m < M; ++m) {
            res.out[static_cast<std::size_t>(m)] += w * values[i * M + m];
        }
        res.opacity += w;
        transmittance *= decay;
    }
    return res;
}

ad::Tensor composite_rays(const ad::Tensor& sigma, const ad::Tensor& values,
                          const std::vector<double>& deltas, int samples_per_ray) {
    if (sigma.rank() != 2 || sigma.dim(1) != 1) {
        throw std::invalid_argument("composite_rays: sigma must be [m,1], got " +
                                    ad::shape_str(sigma.shape()));
    }
    if (values.rank() != 2 || values.dim(0) != sigma.dim(0)) {
        throw std::invalid_argument("composite_rays: values " + ad::shape_str(values.shape()) +
                                    " do not match sigma " + ad::shape_str(sigma.shape()));
    }
    const int m = sigma.dim(0), M = values.dim(1), S = samples_per_ray;
    if (S < 1 || m % S != 0) {
        throw std::invalid_argument("composite_rays: sample count " + std::to_string(m) +
                                    " is not a multiple of " + std::to_string(S));
    }
    if (M < 3) throw std::invalid_argument("composite_rays: need at least 3 color channels");
    if (deltas.size() != static_cast<std::size_t>(m)) {
        throw std::invalid_argument("composite_rays: wrong delta count");
    }
    const int R = m / S;

    ad::Tensor out = ad::Tensor::zeros({R, M + 1});
    const double* sv = sigma.values().data();
    const double* vv = values.values().data();
    double* ov = out.values().data();
    for (int r = 0; r < R; ++r) {
        double* orow = ov + static_cast<std::size_t>(r) * (M + 1);
        double transmittance = 1.0;
        double opacity = 0.0;
        for (int s = 0; s < S; ++s) {
            const std::size_t i = static_cast<std::size_t>(r) * S + s;
            if (sv[i] < 0.0) throw std::invalid_argument("composite_rays: negative sigma");
            if (deltas[i] <= 0.0) throw std::invalid_argument("composite_rays: non-positive delta");
            const double decay = std::exp(-sv[i] * deltas[i]);
            const double w = transmittance * (1.0 - decay);
            const double* vrow = vv + i * M;
            for (int c = 0; c < M; ++c) orow[c] += w * vrow[c];
            opacity += w;
            transmittance *= decay;
        }
        // white background behind the color channels only
        for (int c = 0; c < 3; ++c) orow[c] += 1.0 - opacity;
        orow[M] = opacity;
    }

    if (ad::grad_enabled() && (sigma.requires_grad() || values.requires_grad())) {
        auto adjoint = [sd = sigma.data(), vd = values.data(), od = out.data(), deltas, R, S, M] {
            const double* sv2 = sd->values.data();
            const double* vv2 = vd->values.data();
            const double* g = od->grad.data();
            std::vector<double> T(static_cast<std::size_t>(S)), w(static_cast<std::size_t>(S)),
                decay(static_cast<std::size_t>(S)), G(static_cast<std::size_t>(S));
            for (int r = 0; r < R; ++r) {
                const double* grow = g + static_cast<std::size_t>(r) * (M + 1);
                // d(out_c)/d(opacity) = -1 for the white-backed color channels
                double g_opacity = grow[M];
                for (int c = 0; c < 3; ++c) g_opacity -= grow[c];

                // forward recompute of T_i and w_i, then two passes:
                // dL/dV_i = w_i * g, dL/da_i = G_i T_i e_i - sum_{j>i} G_j w_j
                // with a_i = sigma_i delta_i and G_i = g . V_i + g_opacity.
                double transmittance = 1.0;
                for (int s = 0; s < S; ++s) {
                    const std::size_t i = static_cast<std::size_t>(r) * S + s;
                    T[static_cast<std::size_t>(s)] = transmittance;
                    const double e = std::exp(-sv2[i] * deltas[i]);
                    decay[static_cast<std::size_t>(s)] = e;
                    w[static_cast<std::size_t>(s)] = transmittance * (1.0 - e);
                    transmittance *= e;

                    const double* vrow = vv2 + i * M;
                    double Gi = g_opacity;
                    for (int c = 0; c < M; ++c) Gi += grow[c] * vrow[c];
                    G[static_cast<std::size_t>(s)] = Gi;

                    if (vd->requires_grad) {
                        double* gv = vd->grad.data() + i * M;
                        const double wi = w[static_cast<std::size_t>(s)];
                        for (int c = 0; c < M; ++c) gv[c] += wi * grow[c];
                    }
                }
                if (sd->requires_grad) {
                    double suffix = 0.0;  // sum_{j>s} G_j w_j
                    for (int s = S - 1; s >= 0; --s) {
                        const std::size_t i = static_cast<std::size_t>(r) * S + s;
                        const double da = G[static_cast<std::size_t>(s)] *
                                              T[static_cast<std::size_t>(s)] *
                                              decay[static_cast<std::size_t>(s)] -
                                          suffix;
                        sd->grad[i] += da * deltas[i];
                        suffix += G[static_cast<std::size_t>(s)] * w[static_cast<std::size_t>(s)];
                    }
                }
            }
        };
        out.set_requires_grad(true);
        ad::note_for_grad(sigma);
        ad::note_for_grad(values);
        ad::note_for_grad(out);
        ad::record_op(std::move(adjoint));
    }
    return out;
}

namespace {

// assembles the batched field inputs for a set of rays
ad::Tensor render_rays_impl(const FieldParams& params, const std::vector<Ray>& rays,
                            const std::vector<std::uint64_t>& seeds, const RenderSource& source,
                            int n_samples, bool jitter) {
    if (source.features == nullptr) {
        throw std::invalid_argument("render: missing source feature map");
    }
    if (jitter && seeds.size() != rays.size()) {
        throw std::invalid_argument("render: need one seed per ray");
    }
    const FieldConfig& cfg = params.cfg;
    if (source.features->dim != cfg.F_dim) {
        throw std::invalid_argument("render: feature map dim " +
                                    std::to_string(source.features->dim) +
                                    " does not match field config F_dim " +
                                    std::to_string(cfg.F_dim));
    }
    const int R = static_cast<int>(rays.size());
    const int S = n_samples;
    const int m = R * S;
    const int gx_len = gamma_x_len(cfg), gd_len = gamma_d_len(cfg);

    ad::Tensor gamma_x = ad::Tensor::zeros({m, gx_len});
    ad::Tensor gamma_d = ad::Tensor::zeros({m, gd_len});
    ad::Tensor feature = ad::Tensor::zeros({m, cfg.F_dim});
    std::vector<double> deltas(static_cast<std::size_t>(m));

    for (int r = 0; r < R; ++r) {
        const Ray& ray = rays[static_cast<std::size_t>(r)];
        const auto samples =
            stratified_samples(ray, S, jitter, jitter ? seeds[static_cast<std::size_t>(r)] : 0);
        const auto gd = positional_encode(ray.direction, cfg.L_d);
        for (int s = 0; s < S; ++s) {
            const std::size_t i = static_cast<std::size_t>(r) * S + s;
            const Vec3 x = ray.origin + samples[static_cast<std::size_t>(s)].t * ray.direction;
            deltas[i] = samples[static_cast<std::size_t>(s)].delta;
            const auto gx = positional_encode(x, cfg.L_x);
            std::copy(gx.begin(), gx.end(), gamma_x.values().begin() + i * gx_len);
            std::copy(gd.begin(), gd.end(), gamma_d.values().begin() + i * gd_len);
            const auto f = point_feature(x, source.camera, *source.features);
            std::copy(f.begin(), f.end(), feature.values().begin() + i * cfg.F_dim);
        }
    }

    const FieldBatch field = field_forward_batch(params, gamma_x, gamma_d, feature);
    const ad::Tensor heat = ad::sigmoid(field.heat_logits);
    const ad::Tensor vals = ad::concat(field.color, heat);
    return composite_rays(field.sigma, vals, deltas, S);
}

}  // namespace

ad::Tensor render_rays(const FieldParams& params, const std::vector<Ray>& rays,
                       const std::vector<std::uint64_t>& seeds, const RenderSource& source,
                       int n_samples, bool jitter) {
    return render_rays_impl(params, rays, seeds, source, n_samples, jitter);
}

RenderedPixel render_ray(const FieldParams& params, const Ray& ray, const RenderSource& source,
                         int n_samples, bool jitter, std::uint64_t seed) {
    const ad::Tensor out = render_rays_impl(params, {ray}, {seed}, source, n_samples, jitter);
    const int K = params.cfg.K;
    RenderedPixel px;
    px.color = {out.values()[0], out.values()[1], out.values()[2]};
    px.heat.assign(out.values().begin() + 3, out.values().begin() + 3 + K);
    px.opacity = out.values()[static_cast<std::size_t>(3 + K)];
    return px;
}

RenderedImage render_image(const FieldParams& params, const Camera& cam,
                           const RenderSource& source, int n_samples, double near, double far,
                           int chunk_rays) {
    validate(cam);
    if (chunk_rays < 1) throw std::invalid_argument("render_image: chunk_rays must be >= 1");
    const int K = params.cfg.K;
    RenderedImage out;
    out.image = Image(cam.width, cam.height);
    out.heat = HeatmapStack(K, cam.width, cam.height);
    out.opacity.assign(static_cast<std::size_t>(cam.width) * cam.height, 0.0);

    const std::int64_t total = static_cast<std::int64_t>(cam.width) * cam.height;
    std::vector<Ray> rays;
    rays.reserve(static_cast<std::size_t>(chunk_rays));
    for (std::int64_t base = 0; base < total; base += chunk_rays) {
        const std::int64_t count = std::min<std::int64_t>(chunk_rays, total - base);
        rays.clear();
        for (std::int64_t p = base; p < base + count; ++p) {
            const int y = static_cast<int>(p / cam.width);
            const int x = static_cast<int>(p % cam.width);
            rays.push_back(ray_for_pixel(cam, x, y, near, far));
        }
        const ad::Tensor chunk = render_rays_impl(params, rays, {}, source, n_samples, false);
        const double* cv = chunk.values().data();
        for (std::int64_t p = base; p < base + count; ++p) {
            const int y = static_cast<int>(p / cam.width);
            const int x = static_cast<int>(p % cam.width);
            const double* row = cv + static_cast<std::size_t>(p - base) * (3 + K + 1);
            for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = row[c];
            for (int k = 0; k < K; ++k) out.heat.at(k, x, y) = row[3 + k];
            out.opacity[static_cast<std::size_t>(p)] = row[3 + K];
        }
    }
    return out;
}

}  // namespace hfnerf
