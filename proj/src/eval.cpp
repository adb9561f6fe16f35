#include "hfnerf/eval.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "hfnerf/metrics.hpp"
#include "hfnerf/rendering.hpp"

namespace hfnerf {

Skeleton2D project_scene_skeleton(const Scene& scene, const Camera& cam) {
    Skeleton2D skel;
    for (const Vec3& joint : scene.joints3d) {
        JointDetection det;
        if (const auto proj = project(cam, joint)) {
            const long u = std::lround(proj->u), v = std::lround(proj->v);
            if (u >= 0 && u < cam.width && v >= 0 && v < cam.height) {
                det = {static_cast<int>(u), static_cast<int>(v), 1.0, true};
            }
        }
        skel.joints.push_back(det);
    }
    for (const Bone& b : scene.bones) skel.bones.emplace_back(b.parent, b.child);
    return skel;
}

EvalReport evaluate(const FieldParams& params, const Dataset& ds, int n_samples, double sigma_g,
                    double tau, double alpha) {
    if (ds.test_views.empty()) throw std::invalid_argument("eval: dataset has no test views");
    if (n_samples < 1) throw std::invalid_argument("eval: n_samples must be >= 1");
    const DatasetView& source_view = ds.views[static_cast<std::size_t>(ds.train_views.at(0))];
    const RenderSource source{source_view.camera, &source_view.features};

    std::vector<std::pair<int, int>> connectivity;
    for (const Bone& b : ds.scene.bones) connectivity.emplace_back(b.parent, b.child);

    EvalReport report;
    report.alpha = alpha;
    report.sigma_g = sigma_g;
    report.tau = tau;
    report.mean.view = "mean";
    for (const int vi : ds.test_views) {
        const DatasetView& view = ds.views[static_cast<std::size_t>(vi)];
        const RenderedImage rendered =
            render_image(params, view.camera, source, n_samples, ds.near, ds.far);

        ViewMetrics m;
        m.view = view.name;
        m.psnr = psnr(rendered.image, view.image);
        m.ssim = ssim(rendered.image, view.image);
        m.mse_color = mse(rendered.image, view.image);
        m.mse_heat = mse(rendered.heat, view.heatmaps);

        const Skeleton2D gt = project_scene_skeleton(ds.scene, view.camera);
        const Skeleton2D pred = extract_skeleton(rendered.heat, connectivity, sigma_g, tau);
        m.pck = pck(pred, gt, alpha, pck_ref_scale(gt));

        report.mean.psnr += psnr_json_value(m.psnr);
        report.mean.ssim += m.ssim;
        report.mean.mse_color += m.mse_color;
        report.mean.mse_heat += m.mse_heat;
        report.mean.pck += m.pck;
        report.views.push_back(m);
    }
    const double n = static_cast<double>(report.views.size());
    report.mean.psnr /= n;
    report.mean.ssim /= n;
    report.mean.mse_color /= n;
    report.mean.mse_heat /= n;
    report.mean.pck /= n;
    return report;
}

std::string eval_report_json(const EvalReport& report) {
    using nlohmann::json;
    const auto to_json = [](const ViewMetrics& m) {
        return json{{"view", m.view},           {"psnr", psnr_json_value(m.psnr)},
                    {"ssim", m.ssim},           {"mse_color", m.mse_color},
                    {"mse_heat", m.mse_heat},   {"pck", m.pck}};
    };
    json j;
    j["alpha"] = report.alpha;
    j["sigma_g"] = report.sigma_g;
    j["tau"] = report.tau;
    auto views = json::array();
    for (const ViewMetrics& m : report.views) views.push_back(to_json(m));
    j["views"] = views;
    j["mean"] = to_json(report.mean);
    return j.dump(2) + "\n";
}

}  // namespace hfnerf
