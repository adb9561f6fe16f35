#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hfnerf/camera.hpp"
#include "hfnerf/encoding.hpp"
#include "hfnerf/geometry.hpp"
#include "hfnerf/heatmap.hpp"
#include "hfnerf/image.hpp"

namespace hfnerf {

// One rigid body segment of the figure: a capsule from joint `parent` to
// joint `child`.
struct Bone {
    int parent = 0;
    int child = 0;
    double radius = 0.05;
    Vec3 albedo{0.5, 0.5, 0.5};
};

struct Scene {
    std::uint64_t seed = 0;
    std::vector<Vec3> joints3d;  // K joints, all inside [-0.9, 0.9]^3
    std::vector<Bone> bones;     // K-1 edges, a tree rooted at the pelvis
    int joint_count() const { return static_cast<int>(joints3d.size()); }
};

// Names and canonical (parent, child, length) table of the 16-joint figure.
// Lengths are world units in the normalized scene; generate_scene jitters
// them by at most +-10%, so tests can bound generated bones against this.
struct CanonicalBone {
    int parent;
    int child;
    double length;
};
const std::vector<std::string>& joint_names();
const std::vector<CanonicalBone>& canonical_bones();

// Deterministic articulated capsule figure: canonical limb lengths jittered
// +-10%, limb directions drawn inside per-bone cones (the anatomical
// bounds), sized so every joint stays inside [-0.9, 0.9]^3.
Scene generate_scene(std::uint64_t seed);

// Analytic render of the capsule figure: nearest ray-capsule hit shaded as
// albedo * (0.3 + 0.7 * max(0, n . l)) with l = normalize(1,1,1); rays that
// miss every capsule see a white backdrop.
Image render_ground_truth(const Scene& scene, const Camera& cam);

// Distance to the nearest capsule surface along origin + t * dir, or nullopt.
// Exposed for occlusion tests and the depth-based teacher culling.
struct CapsuleHit {
    double t = 0.0;
    Vec3 normal;
    int bone = 0;
};
std::optional<CapsuleHit> trace_capsules(const Scene& scene, const Vec3& origin, const Vec3& dir);

// Per-joint Gaussian target maps. Channel k carries
// exp(-((u - u_k)^2 + (v - v_k)^2) / (2 sigma_h^2)) with (u_k, v_k) the
// projection of joint k rounded to the nearest pixel, so the peak pixel is
// exactly 1. Joints behind the camera or rounding outside the image give an
// all-zero channel. occlusion_cull additionally zeroes joints buried behind
// nearer capsule geometry (off by default: dense supervision, simple oracle).
HeatmapStack teacher_heatmaps(const Scene& scene, const Camera& cam, double sigma_h,
                              bool occlusion_cull = false);

// Cameras on a radius-3 ring around the origin, azimuths evenly spaced,
// alternating between two elevations, all aimed at the origin.
// f = 0.9 * size, principal point at the image center.
std::vector<Camera> camera_ring(int n, int size);

inline constexpr double kSceneNear = 1.2;
inline constexpr double kSceneFar = 4.8;
inline constexpr double kTeacherSigmaAt64 = 2.0;  // px; scales with size / 64

struct DatasetView {
    std::string name;
    bool is_test = false;
    Camera camera;
    std::string image_path, feature_path, heatmap_path;  // relative to the manifest
    Image image;
    FeatureMap features;
    HeatmapStack heatmaps;
};

struct Dataset {
    Scene scene;
    int image_size = 0;
    double teacher_sigma = 0.0;
    double near = kSceneNear, far = kSceneFar;
    bool occlusion_cull = false;
    std::vector<DatasetView> views;
    std::vector<int> train_views, test_views;  // indices into views
};

// Generates scene + views + files under out_dir and writes manifest.json
// there. Test views are spread evenly through the ring; splits are disjoint.
// Returns the generated dataset (views fully loaded).
Dataset generate_dataset(std::uint64_t seed, int n_train, int n_test, int size,
                         const std::string& out_dir, double sigma_h_at_64 = kTeacherSigmaAt64,
                         bool occlusion_cull = false);

// Loads manifest.json and every referenced file, validating dimensions,
// joint-count consistency, and value ranges. Errors name the offending file.
Dataset load_dataset(const std::string& manifest_path);

}  // namespace hfnerf
