#include "hfnerf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "hfnerf/rng.hpp"

namespace hfnerf {

namespace {

using nlohmann::json;

// Joint indices of the 16-joint figure; bones below reference these.
enum Joint {
    kPelvis,
    kSpine,
    kNeck,
    kHead,
    kLShoulder,
    kLElbow,
    kLWrist,
    kRShoulder,
    kRElbow,
    kRWrist,
    kLHip,
    kLKnee,
    kLAnkle,
    kRHip,
    kRKnee,
    kRAnkle,
    kJointCount,
};

struct BoneSpec {
    int parent, child;
    double length;
    Vec3 rest_dir;    // canonical direction, pelvis-up coordinates
    double cone;      // max angular deviation from rest_dir, radians
    double radius;
};

// Rest pose: subject upright, arms hanging slightly spread. Lengths are sized
// (with the pelvis at y = 0.08) so that even at +10% length and maximal cone
// deviation no joint leaves [-0.9, 0.9]^3.
const std::vector<BoneSpec>& bone_specs() {
    static const std::vector<BoneSpec> specs = {
        {kPelvis, kSpine, 0.28, {0.0, 1.0, 0.0}, 0.12, 0.085},
        {kSpine, kNeck, 0.25, {0.0, 1.0, 0.0}, 0.12, 0.075},
        {kNeck, kHead, 0.18, {0.0, 1.0, 0.0}, 0.15, 0.075},
        {kNeck, kLShoulder, 0.18, {-1.0, 0.0, 0.0}, 0.10, 0.055},
        {kLShoulder, kLElbow, 0.28, {-0.35, -1.0, 0.0}, 0.35, 0.045},
        {kLElbow, kLWrist, 0.24, {-0.15, -1.0, 0.15}, 0.35, 0.040},
        {kNeck, kRShoulder, 0.18, {1.0, 0.0, 0.0}, 0.10, 0.055},
        {kRShoulder, kRElbow, 0.28, {0.35, -1.0, 0.0}, 0.35, 0.045},
        {kRElbow, kRWrist, 0.24, {0.15, -1.0, 0.15}, 0.35, 0.040},
        {kPelvis, kLHip, 0.10, {-1.0, -0.35, 0.0}, 0.08, 0.055},
        {kLHip, kLKnee, 0.38, {-0.08, -1.0, 0.0}, 0.25, 0.060},
        {kLKnee, kLAnkle, 0.38, {0.0, -1.0, 0.08}, 0.25, 0.050},
        {kPelvis, kRHip, 0.10, {1.0, -0.35, 0.0}, 0.08, 0.055},
        {kRHip, kRKnee, 0.38, {0.08, -1.0, 0.0}, 0.25, 0.060},
        {kRKnee, kRAnkle, 0.38, {0.0, -1.0, 0.08}, 0.25, 0.050},
    };
    return specs;
}

// any unit vector not parallel to d
Vec3 perpendicular(const Vec3& d) {
    const Vec3 probe = std::abs(d.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    return normalized(cross(d, probe));
}

std::string view_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "view_%02d", i);
    return buf;
}

const char* image_extension() {
#ifdef HFNERF_HAVE_PNG
    return ".png";
#else
    return ".ppm";
#endif
}

json camera_to_json(const Camera& cam) {
    std::vector<double> pose(16);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) pose[static_cast<std::size_t>(r) * 4 + c] = cam.cam_to_world.at(r, c);
    }
    return json{{"fx", cam.fx},         {"fy", cam.fy},         {"cx", cam.cx},
                {"cy", cam.cy},         {"width", cam.width},   {"height", cam.height},
                {"cam_to_world", pose}};
}

Camera camera_from_json(const json& j) {
    Camera cam;
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    const auto pose = j.at("cam_to_world").get<std::vector<double>>();
    if (pose.size() != 16) throw std::runtime_error("manifest camera pose must have 16 entries");
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) cam.cam_to_world.at(r, c) = pose[static_cast<std::size_t>(r) * 4 + c];
    }
    return cam;
}

}  // namespace

const std::vector<std::string>& joint_names() {
    static const std::vector<std::string> names = {
        "pelvis",     "spine",      "neck",    "head",    "l_shoulder", "l_elbow",
        "l_wrist",    "r_shoulder", "r_elbow", "r_wrist", "l_hip",      "l_knee",
        "l_ankle",    "r_hip",      "r_knee",  "r_ankle",
    };
    return names;
}

const std::vector<CanonicalBone>& canonical_bones() {
    static const std::vector<CanonicalBone> table = [] {
        std::vector<CanonicalBone> t;
        for (const BoneSpec& s : bone_specs()) t.push_back({s.parent, s.child, s.length});
        return t;
    }();
    return table;
}

Scene generate_scene(std::uint64_t seed) {
    Rng rng(splitmix64(seed));
    Scene scene;
    scene.seed = seed;
    scene.joints3d.assign(kJointCount, Vec3{});
    scene.joints3d[kPelvis] = {0.0, 0.08, 0.0};

    for (const BoneSpec& spec : bone_specs()) {
        const double length = spec.length * (1.0 + rng.uniform(-0.1, 0.1));
        const Vec3 rest = normalized(spec.rest_dir);
        // direction inside the cone around rest: tilt by theta toward a
        // uniformly random perpendicular
        const double theta = spec.cone * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec3 e1 = perpendicular(rest);
        const Vec3 e2 = cross(rest, e1);
        const Vec3 dir = std::cos(theta) * rest +
                         std::sin(theta) * (std::cos(phi) * e1 + std::sin(phi) * e2);
        scene.joints3d[static_cast<std::size_t>(spec.child)] =
            scene.joints3d[static_cast<std::size_t>(spec.parent)] + length * dir;

        Bone bone;
        bone.parent = spec.parent;
        bone.child = spec.child;
        bone.radius = spec.radius;
        bone.albedo = {rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85)};
        scene.bones.push_back(bone);
    }

    // The bone table guarantees this never triggers; kept as a hard backstop
    // for the [-0.9, 0.9]^3 contract.
    double max_abs = 0.0;
    for (const Vec3& p : scene.joints3d) {
        max_abs = std::max({max_abs, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
    }
    if (max_abs > 0.9) {
        const double s = 0.9 / max_abs;
        for (Vec3& p : scene.joints3d) p = s * p;
    }
    return scene;
}

std::optional<CapsuleHit> trace_capsules(const Scene& scene, const Vec3& origin, const Vec3& dir) {
    constexpr double kMinT = 1e-9;
    std::optional<CapsuleHit> best;
    const auto consider = [&](double t, const Vec3& normal, int bone) {
        if (t > kMinT && (!best || t < best->t)) best = CapsuleHit{t, normal, bone};
    };
    for (std::size_t b = 0; b < scene.bones.size(); ++b) {
        const Bone& bone = scene.bones[b];
        const Vec3 A = scene.joints3d[static_cast<std::size_t>(bone.parent)];
        const Vec3 B = scene.joints3d[static_cast<std::size_t>(bone.child)];
        const double r = bone.radius;
        const Vec3 axis = B - A;
        const double L = norm(axis);
        const Vec3 n = (1.0 / L) * axis;

        // infinite cylinder around the axis
        const Vec3 ao = origin - A;
        const Vec3 w = dir - dot(dir, n) * n;
        const Vec3 m = ao - dot(ao, n) * n;
        const double a = dot(w, w);
        if (a > 1e-12) {
            const double half_b = dot(m, w);
            const double c = dot(m, m) - r * r;
            const double disc = half_b * half_b - a * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                for (const double t : {(-half_b - sq) / a, (-half_b + sq) / a}) {
                    const double s = dot(ao + t * dir, n);
                    if (s >= 0.0 && s <= L) {
                        const Vec3 p = origin + t * dir;
                        consider(t, (1.0 / r) * (p - (A + s * n)), static_cast<int>(b));
                    }
                }
            }
        }
        // sphere caps
        for (const Vec3& center : {A, B}) {
            const Vec3 oc = origin - center;
            const double half_b = dot(dir, oc);
            const double c = dot(oc, oc) - r * r;
            const double disc = half_b * half_b - c;
            if (disc < 0.0) continue;
            const double sq = std::sqrt(disc);
            for (const double t : {-half_b - sq, -half_b + sq}) {
                const Vec3 p = origin + t * dir;
                consider(t, (1.0 / r) * (p - center), static_cast<int>(b));
            }
        }
    }
    return best;
}

Image render_ground_truth(const Scene& scene, const Camera& cam) {
    validate(cam);
    const Vec3 light = normalized({1.0, 1.0, 1.0});
    Image img(cam.width, cam.height);
    for (int v = 0; v < cam.height; ++v) {
        for (int u = 0; u < cam.width; ++u) {
            const Ray ray = ray_for_pixel(cam, u, v, kSceneNear, kSceneFar);
            const auto hit = trace_capsules(scene, ray.origin, ray.direction);
            Vec3 color{1.0, 1.0, 1.0};
            if (hit) {
                const Vec3& albedo = scene.bones[static_cast<std::size_t>(hit->bone)].albedo;
                const double shade = 0.3 + 0.7 * std::max(0.0, dot(hit->normal, light));
                color = shade * albedo;
            }
            img.at(u, v, 0) = std::clamp(color.x, 0.0, 1.0);
            img.at(u, v, 1) = std::clamp(color.y, 0.0, 1.0);
            img.at(u, v, 2) = std::clamp(color.z, 0.0, 1.0);
        }
    }
    return img;
}

HeatmapStack teacher_heatmaps(const Scene& scene, const Camera& cam, double sigma_h,
                              bool occlusion_cull) {
    if (!(sigma_h > 0.0)) throw std::invalid_argument("teacher heatmaps: sigma_h must be > 0");
    validate(cam);
    const int K = scene.joint_count();
    HeatmapStack stack(K, cam.width, cam.height);
    const Vec3 cam_origin{cam.cam_to_world.at(0, 3), cam.cam_to_world.at(1, 3),
                          cam.cam_to_world.at(2, 3)};
    for (int k = 0; k < K; ++k) {
        const Vec3& joint = scene.joints3d[static_cast<std::size_t>(k)];
        const auto proj = project(cam, joint);
        if (!proj) continue;
        // snap the peak to the nearest pixel so its value is exactly 1
        const long cu = std::lround(proj->u);
        const long cv = std::lround(proj->v);
        if (cu < 0 || cu >= cam.width || cv < 0 || cv >= cam.height) continue;
        if (occlusion_cull) {
            // A joint sits inside its own capsules, so the sight ray always
            // meets some surface before reaching it. The joint counts as
            // visible when that first surface is its own flesh: within two
            // incident-capsule radii of the joint (two, because an oblique
            // ray can graze the tube up to radius/sin(angle) early).
            const Vec3 to_joint = joint - cam_origin;
            const double dist = norm(to_joint);
            const Vec3 dir = (1.0 / dist) * to_joint;
            double slack = 0.0;
            for (const Bone& b : scene.bones) {
                if (b.parent == k || b.child == k) slack = std::max(slack, b.radius);
            }
            const auto hit = trace_capsules(scene, cam_origin, dir);
            if (hit && hit->t < dist &&
                norm(cam_origin + hit->t * dir - joint) > 2.0 * slack + 1e-6) {
                continue;
            }
        }
        const double inv = 1.0 / (2.0 * sigma_h * sigma_h);
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                const double dx = x - static_cast<double>(cu);
                const double dy = y - static_cast<double>(cv);
                stack.at(k, x, y) = std::exp(-(dx * dx + dy * dy) * inv);
            }
        }
    }
    return stack;
}

std::vector<Camera> camera_ring(int n, int size) {
    if (n < 1) throw std::invalid_argument("camera ring: need at least one view");
    if (size < 8) throw std::invalid_argument("camera ring: image size too small");
    constexpr double kRadius = 3.0;
    constexpr double kElevation[2] = {0.15, 0.45};  // radians, alternating
    std::vector<Camera> cams;
    for (int i = 0; i < n; ++i) {
        const double az = 2.0 * std::numbers::pi * i / n;
        const double el = kElevation[i % 2];
        const Vec3 eye{kRadius * std::cos(el) * std::cos(az), kRadius * std::sin(el),
                       kRadius * std::cos(el) * std::sin(az)};
        Camera cam;
        cam.fx = cam.fy = 0.9 * size;
        cam.cx = cam.cy = size / 2.0;
        cam.width = cam.height = size;
        cam.cam_to_world = look_at(eye, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0});
        validate(cam);
        cams.push_back(cam);
    }
    return cams;
}

Dataset generate_dataset(std::uint64_t seed, int n_train, int n_test, int size,
                         const std::string& out_dir, double sigma_h_at_64, bool occlusion_cull) {
    namespace fs = std::filesystem;
    if (n_train < 1) throw std::invalid_argument("dataset: need at least one training view");
    if (n_test < 0 || n_test > n_train) {
        throw std::invalid_argument("dataset: test view count must be in [0, n_train]");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("dataset: cannot create " + out_dir + ": " + ec.message());

    const Scene scene = generate_scene(seed);
    const int n = n_train + n_test;
    const std::vector<Camera> cams = camera_ring(n, size);
    const double sigma_h = sigma_h_at_64 * size / 64.0;

    // spread test views evenly through the ring
    std::vector<bool> is_test(static_cast<std::size_t>(n), false);
    for (int j = 0; j < n_test; ++j) {
        is_test[static_cast<std::size_t>((j + 0.5) * n / n_test)] = true;
    }

    json views = json::array();
    for (int i = 0; i < n; ++i) {
        const std::string name = view_name(i);
        const std::string image_file = name + image_extension();
        const std::string feature_file = name + ".feat";
        const std::string heat_file = name + ".heat";

        const Image img = render_ground_truth(scene, cams[i]);
        write_image((fs::path(out_dir) / image_file).string(), img);
        FeatureMap features = builtin_pyramid_encoder(img);
        features.source_view = name;
        save_feature_map((fs::path(out_dir) / feature_file).string(), features);
        const HeatmapStack heat = teacher_heatmaps(scene, cams[i], sigma_h, occlusion_cull);
        save_heatmaps((fs::path(out_dir) / heat_file).string(), heat);

        views.push_back({{"name", name},
                         {"split", is_test[static_cast<std::size_t>(i)] ? "test" : "train"},
                         {"camera", camera_to_json(cams[i])},
                         {"image", image_file},
                         {"features", feature_file},
                         {"heatmaps", heat_file}});
    }

    json scene_json;
    scene_json["seed"] = scene.seed;
    scene_json["K"] = scene.joint_count();
    json joints = json::array();
    for (const Vec3& p : scene.joints3d) joints.push_back({p.x, p.y, p.z});
    scene_json["joints3d"] = joints;
    json bones = json::array();
    for (const Bone& b : scene.bones) {
        bones.push_back({{"parent", b.parent},
                         {"child", b.child},
                         {"radius", b.radius},
                         {"albedo", {b.albedo.x, b.albedo.y, b.albedo.z}}});
    }
    scene_json["bones"] = bones;

    const json manifest = {{"scene", scene_json},      {"image_size", size},
                           {"teacher_sigma", sigma_h}, {"near", kSceneNear},
                           {"far", kSceneFar},         {"occlusion_cull", occlusion_cull},
                           {"views", views}};
    const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
    {
        std::ofstream out(manifest_path);
        if (!out) throw std::runtime_error("dataset: cannot write " + manifest_path.string());
        out << manifest.dump(2) << "\n";
    }
    // hand back exactly what a consumer will see, including file quantization
    return load_dataset(manifest_path.string());
}

Dataset load_dataset(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("dataset: cannot open manifest " + manifest_path);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw std::runtime_error("dataset: malformed manifest " + manifest_path + ": " + e.what());
    }

    Dataset ds;
    try {
        const json& sj = manifest.at("scene");
        ds.scene.seed = sj.at("seed").get<std::uint64_t>();
        const int K = sj.at("K").get<int>();
        for (const auto& p : sj.at("joints3d")) {
            ds.scene.joints3d.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                         p.at(2).get<double>()});
        }
        if (ds.scene.joint_count() != K) {
            throw std::runtime_error("joint count disagrees with joints3d length");
        }
        for (const Vec3& p : ds.scene.joints3d) {
            if (std::abs(p.x) > 1.0 || std::abs(p.y) > 1.0 || std::abs(p.z) > 1.0) {
                throw std::runtime_error("joint outside the [-1,1]^3 scene volume");
            }
        }
        for (const auto& bj : sj.at("bones")) {
            Bone b;
            b.parent = bj.at("parent").get<int>();
            b.child = bj.at("child").get<int>();
            b.radius = bj.at("radius").get<double>();
            const auto& al = bj.at("albedo");
            b.albedo = {al.at(0).get<double>(), al.at(1).get<double>(), al.at(2).get<double>()};
            if (b.parent < 0 || b.parent >= K || b.child < 0 || b.child >= K) {
                throw std::runtime_error("bone references a joint outside 0.." +
                                         std::to_string(K - 1));
            }
            ds.scene.bones.push_back(b);
        }

        ds.image_size = manifest.at("image_size").get<int>();
        ds.teacher_sigma = manifest.at("teacher_sigma").get<double>();
        ds.near = manifest.at("near").get<double>();
        ds.far = manifest.at("far").get<double>();
        ds.occlusion_cull = manifest.value("occlusion_cull", false);

        const fs::path dir = fs::path(manifest_path).parent_path();
        int feature_dim = -1;
        for (const auto& vj : manifest.at("views")) {
            DatasetView view;
            view.name = vj.at("name").get<std::string>();
            const std::string split = vj.at("split").get<std::string>();
            if (split != "train" && split != "test") {
                throw std::runtime_error("view " + view.name + " has unknown split '" + split + "'");
            }
            view.is_test = split == "test";
            view.camera = camera_from_json(vj.at("camera"));
            validate(view.camera);
            view.image_path = vj.at("image").get<std::string>();
            view.feature_path = vj.at("features").get<std::string>();
            view.heatmap_path = vj.at("heatmaps").get<std::string>();

            view.image = load_image((dir / view.image_path).string());
            view.features = load_feature_map((dir / view.feature_path).string());
            view.features.source_view = view.name;
            view.heatmaps = load_heatmaps((dir / view.heatmap_path).string());

            if (view.image.width != ds.image_size || view.image.height != ds.image_size) {
                throw std::runtime_error("image " + view.image_path + " is " +
                                         std::to_string(view.image.width) + "x" +
                                         std::to_string(view.image.height) + ", manifest says " +
                                         std::to_string(ds.image_size));
            }
            if (view.camera.width != ds.image_size || view.camera.height != ds.image_size) {
                throw std::runtime_error("camera of " + view.name + " disagrees with image size");
            }
            if (view.features.width != ds.image_size || view.features.height != ds.image_size) {
                throw std::runtime_error("feature map " + view.feature_path +
                                         " disagrees with image size");
            }
            if (feature_dim == -1) feature_dim = view.features.dim;
            if (view.features.dim != feature_dim) {
                throw std::runtime_error("feature map " + view.feature_path + " has dim " +
                                         std::to_string(view.features.dim) + ", expected " +
                                         std::to_string(feature_dim));
            }
            if (view.heatmaps.K != K) {
                throw std::runtime_error("heatmap stack " + view.heatmap_path + " has K=" +
                                         std::to_string(view.heatmaps.K) + ", scene has K=" +
                                         std::to_string(K));
            }
            if (view.heatmaps.width != ds.image_size || view.heatmaps.height != ds.image_size) {
                throw std::runtime_error("heatmap stack " + view.heatmap_path +
                                         " disagrees with image size");
            }
            for (double h : view.heatmaps.values) {
                if (!(h >= 0.0 && h <= 1.0)) {
                    throw std::runtime_error("heatmap stack " + view.heatmap_path +
                                             " has values outside [0,1]");
                }
            }
            const int idx = static_cast<int>(ds.views.size());
            (view.is_test ? ds.test_views : ds.train_views).push_back(idx);
            ds.views.push_back(std::move(view));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error("dataset: manifest " + manifest_path +
                                 " is missing or mistypes a field: " + e.what());
    }
    if (ds.train_views.empty()) {
        throw std::runtime_error("dataset: manifest " + manifest_path + " has no training views");
    }
    return ds;
}

}  // namespace hfnerf
