#pragma once

#include <cstdint>
#include <vector>

#include "hfnerf/camera.hpp"
#include "hfnerf/encoding.hpp"
#include "hfnerf/field.hpp"
#include "hfnerf/heatmap.hpp"
#include "hfnerf/image.hpp"
#include "hfnerf/tensor.hpp"

namespace hfnerf {

// Plain (tape-free) alpha compositing of n samples carrying M channels each.
// alpha_i = 1 - exp(-sigma_i * delta_i), T_i = prod_{j<i} (1 - alpha_j),
// w_i = T_i * alpha_i. No background is applied here.
struct CompositeResult {
    std::vector<double> out;      // M channels: sum_i w_i * values[i]
    double opacity = 0.0;         // sum_i w_i
    std::vector<double> weights;  // n
};
CompositeResult composite(const std::vector<double>& sigmas, const std::vector<double>& deltas,
                          const std::vector<double>& values, int M);

// Differentiable batched compositing. sigma is [m,1], values [m,M] with
// m = R * samples_per_ray rays laid out consecutively; deltas are fixed
// sample spacings. Output is [R, M+1]: columns 0..2 = color over a white
// background, 3..M-1 = remaining channels over zero background, M = opacity.
ad::Tensor composite_rays(const ad::Tensor& sigma, const ad::Tensor& values,
                          const std::vector<double>& deltas, int samples_per_ray);

struct RenderedPixel {
    Vec3 color;                // [0,1], composited over white
    std::vector<double> heat;  // K channels in [0,1], composited over zero
    double opacity = 0.0;      // sum of weights
};

// Rendering context shared by every ray of a scene: the source view whose
// feature map conditions the field.
struct RenderSource {
    Camera camera;
    const FeatureMap* features = nullptr;
};

// Differentiable batch render: one tape op chain for all rays. Per-ray
// stratified sample seeds come from `seeds` (ignored when jitter is off).
// Returns [R, 3+K+1]: white-background color, heat channels, opacity.
ad::Tensor render_rays(const FieldParams& params, const std::vector<Ray>& rays,
                       const std::vector<std::uint64_t>& seeds, const RenderSource& source,
                       int n_samples, bool jitter);

RenderedPixel render_ray(const FieldParams& params, const Ray& ray, const RenderSource& source,
                         int n_samples, bool jitter, std::uint64_t seed);

struct RenderedImage {
    Image image;
    HeatmapStack heat;
    std::vector<double> opacity;  // row-major [height][width]
};

// Row-major full-frame render, jitter off, rays batched in chunks of
// chunk_rays (result independent of the chunk size).
RenderedImage render_image(const FieldParams& params, const Camera& cam,
                           const RenderSource& source, int n_samples, double near, double far,
                           int chunk_rays = 512);

}  // namespace hfnerf
