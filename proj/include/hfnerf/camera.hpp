#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hfnerf/geometry.hpp"

namespace hfnerf {

// Pinhole camera. Pixel coordinates are indices: pixel (u, v) covers
// [u, u+1) x [v, v+1) with its center at (u+0.5, v+0.5). v grows downward.
// The camera looks along its local -z axis, +y up in camera space.
struct Camera {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    Mat4 cam_to_world = Mat4::identity();
};

// Throws std::invalid_argument on bad intrinsics or a non-rigid pose
// (rotation must satisfy R^T R = I within 1e-9 and det R = +1).
void validate(const Camera& cam);

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
    double near = 0.0, far = 0.0;
};

// Ray through the center of pixel (u, v); sub-pixel positions allowed.
// near/far bound the sampled segment and must satisfy 0 < near < far.
Ray ray_for_pixel(const Camera& cam, double u, double v, double near, double far);

struct PixelProjection {
    double u = 0.0, v = 0.0;  // pixel-index coordinates, may fall outside the image
    double depth = 0.0;       // distance along the camera -z axis, > 0
};

// nullopt = point at or behind the camera (depth <= 1e-9); out-of-bounds
// pixels are returned as-is for the caller to judge.
std::optional<PixelProjection> project(const Camera& cam, const Vec3& p_world);

struct DepthSample {
    double t = 0.0;      // depth along the ray
    double delta = 0.0;  // spacing to the next sample (last one: to far)
};

// n depths over [near, far] in equal bins: midpoints when jitter is off,
// uniform within each bin when on. Deterministic per seed.
std::vector<DepthSample> stratified_samples(const Ray& ray, int n, bool jitter,
                                            std::uint64_t rng_seed);

// cam_to_world for a camera at eye looking at target (local -z toward it).
Mat4 look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

}  // namespace hfnerf
