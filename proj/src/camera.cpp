#include "hfnerf/camera.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hfnerf/rng.hpp"

namespace hfnerf {

void validate(const Camera& cam) {
    if (cam.width <= 0 || cam.height <= 0) {
        throw std::invalid_argument("camera: non-positive image size " +
                                    std::to_string(cam.width) + "x" + std::to_string(cam.height));
    }
    if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) {
        throw std::invalid_argument("camera: focal lengths must be positive");
    }
    if (!(cam.cx >= 0.0 && cam.cx < cam.width) || !(cam.cy >= 0.0 && cam.cy < cam.height)) {
        throw std::invalid_argument("camera: principal point outside the image");
    }
    const Mat4& M = cam.cam_to_world;
    for (int j = 0; j < 3; ++j) {
        if (M.at(3, j) != 0.0) throw std::invalid_argument("camera: pose bottom row must be 0 0 0 1");
    }
    if (M.at(3, 3) != 1.0) throw std::invalid_argument("camera: pose bottom row must be 0 0 0 1");
    // R^T R = I within 1e-9
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += M.at(k, i) * M.at(k, j);
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(s - want) > 1e-9) {
                throw std::invalid_argument("camera: rotation is not orthonormal");
            }
        }
    }
    const double det =
        M.at(0, 0) * (M.at(1, 1) * M.at(2, 2) - M.at(1, 2) * M.at(2, 1)) -
        M.at(0, 1) * (M.at(1, 0) * M.at(2, 2) - M.at(1, 2) * M.at(2, 0)) +
        M.at(0, 2) * (M.at(1, 0) * M.at(2, 1) - M.at(1, 1) * M.at(2, 0));
    if (std::abs(det - 1.0) > 1e-6) {
        throw std::invalid_argument("camera: rotation determinant is not +1 (got " +
                                    std::to_string(det) + ")");
    }
}

Ray ray_for_pixel(const Camera& cam, double u, double v, double near, double far) {
    if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) {
        throw std::out_of_range("ray_for_pixel: pixel (" + std::to_string(u) + ", " +
                                std::to_string(v) + ") outside " + std::to_string(cam.width) +
                                "x" + std::to_string(cam.height));
    }
    if (!(near > 0.0 && near < far)) {
        throw std::invalid_argument("ray_for_pixel: need 0 < near < far");
    }
    const Vec3 dir_cam{(u + 0.5 - cam.cx) / cam.fx, (cam.cy - (v + 0.5)) / cam.fy, -1.0};
    Ray ray;
    ray.origin = cam.cam_to_world.transform_point({0.0, 0.0, 0.0});
    ray.direction = normalized(cam.cam_to_world.transform_dir(dir_cam));
    ray.near = near;
    ray.far = far;
    return ray;
}

std::optional<PixelProjection> project(const Camera& cam, const Vec3& p_world) {
    const Vec3 p = cam.cam_to_world.rigid_inverse().transform_point(p_world);
    const double depth = -p.z;
    if (depth <= 1e-9) return std::nullopt;
    PixelProjection out;
    out.u = cam.cx + cam.fx * (p.x / depth) - 0.5;
    out.v = cam.cy - cam.fy * (p.y / depth) - 0.5;
    out.depth = depth;
    return out;
}

std::vector<DepthSample> stratified_samples(const Ray& ray, int n, bool jitter,
                                            std::uint64_t rng_seed) {
    if (n < 1) throw std::invalid_argument("stratified_samples: n must be >= 1");
    const double range = ray.far - ray.near;
    const double inv_n = 1.0 / static_cast<double>(n);
    Rng rng(rng_seed);
    std::vector<DepthSample> samples(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double frac = jitter ? rng.uniform() : 0.5;
        samples[static_cast<std::size_t>(i)].t =
            ray.near + (static_cast<double>(i) + frac) * inv_n * range;
    }
    for (int i = 0; i + 1 < n; ++i) {
        samples[static_cast<std::size_t>(i)].delta =
            samples[static_cast<std::size_t>(i) + 1].t - samples[static_cast<std::size_t>(i)].t;
    }
    samples[static_cast<std::size_t>(n) - 1].delta =
        ray.far - samples[static_cast<std::size_t>(n) - 1].t;
    return samples;
}

Mat4 look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 back = normalized(eye - target);        // local +z points away from the target
    const Vec3 right = normalized(cross(up, back));
    const Vec3 true_up = cross(back, right);
    Mat4 m = Mat4::identity();
    m.at(0, 0) = right.x;
    m.at(1, 0) = right.y;
    m.at(2, 0) = right.z;
    m.at(0, 1) = true_up.x;
    m.at(1, 1) = true_up.y;
    m.at(2, 1) = true_up.z;
    m.at(0, 2) = back.x;
    m.at(1, 2) = back.y;
    m.at(2, 2) = back.z;
    m.at(0, 3) = eye.x;
    m.at(1, 3) = eye.y;
    m.at(2, 3) = eye.z;
    return m;
}

}  // namespace hfnerf
