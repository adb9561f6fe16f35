#pragma once

#include <string>
#include <vector>

#include "hfnerf/dataset.hpp"
#include "hfnerf/field.hpp"
#include "hfnerf/skeleton.hpp"

namespace hfnerf {

struct ViewMetrics {
    std::string view;
    double psnr = 0.0;       // dB; +inf possible for identical images
    double ssim = 0.0;
    double mse_color = 0.0;
    double mse_heat = 0.0;
    double pck = 0.0;        // PCK at the alpha used by evaluate()
};

struct EvalReport {
    std::vector<ViewMetrics> views;  // one per test view
    ViewMetrics mean;                // arithmetic means, view = "mean"
    double alpha = 0.1, sigma_g = kDefaultSigmaG, tau = kDefaultTau;
};

// The ground-truth skeleton of a view: joints3d projected into the camera,
// present wherever the rounded projection lands inside the image.
Skeleton2D project_scene_skeleton(const Scene& scene, const Camera& cam);

// Renders every test view with the first train view as feature source and
// compares against ground truth. PCK uses the projected gt skeleton with
// ref_scale = its bounding-box diagonal.
EvalReport evaluate(const FieldParams& params, const Dataset& ds, int n_samples,
                    double sigma_g = kDefaultSigmaG, double tau = kDefaultTau,
                    double alpha = 0.1);

// {"views": [...], "mean": {...}, "alpha": ..}; infinite PSNR serializes as 1e9.
std::string eval_report_json(const EvalReport& report);

}  // namespace hfnerf
