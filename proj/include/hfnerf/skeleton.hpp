#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hfnerf/heatmap.hpp"
#include "hfnerf/image.hpp"

namespace hfnerf {

struct JointDetection {
    int u = 0, v = 0;          // pixel indices
    double confidence = 0.0;   // original (unblurred) channel value at (u, v)
    bool present = false;      // present == false forces confidence == 0
};

struct Skeleton2D {
    std::vector<JointDetection> joints;                 // K entries
    std::vector<std::pair<int, int>> bones;             // (parent, child) joint indices
};

inline constexpr double kDefaultSigmaG = 1.5;  // px
inline constexpr double kDefaultTau = 0.30;

// Separable Gaussian, kernel radius ceil(3 sigma), taps renormalized over the
// in-bounds window at borders (so a constant map stays constant).
std::vector<double> gaussian_blur(const std::vector<double>& map, int width, int height,
                                  double sigma_g);

// Peak picking per the mask-then-argmax rule: blur builds the mask
// (blurred >= tau); the joint is the argmax of the ORIGINAL channel inside
// the mask, ties broken by smallest (v, u). Empty mask -> absent.
std::optional<JointDetection> extract_joint(const std::vector<double>& channel, int width,
                                            int height, double sigma_g, double tau);

// extract_joint per channel, independently; bones copied from connectivity.
Skeleton2D extract_skeleton(const HeatmapStack& stack,
                            const std::vector<std::pair<int, int>>& connectivity,
                            double sigma_g = kDefaultSigmaG, double tau = kDefaultTau);

// Fraction of gt-present joints whose prediction is present and within
// alpha * ref_scale pixels. ref_scale is conventionally the diagonal of the
// gt joints' bounding box (see pck_ref_scale).
double pck(const Skeleton2D& pred, const Skeleton2D& gt, double alpha, double ref_scale);
double pck_ref_scale(const Skeleton2D& gt);  // bbox diagonal of present joints

// JSON with joints [{k,u,v,confidence,present}], bones [[a,b]], and the
// sigma_g/tau that produced the skeleton.
std::string skeleton_to_json(const Skeleton2D& skel, double sigma_g, double tau);

// SVG of bones and joints at the heatmap resolution; when image_href is
// nonempty the raster is referenced underneath the overlay.
std::string skeleton_to_svg(const Skeleton2D& skel, int width, int height,
                            const std::string& image_href = "");

}  // namespace hfnerf
