#include "hfnerf/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hfnerf {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        total += w;
    }
    for (double& w : k) w /= total;
    return k;
}

// 1-D pass along x or y with border renormalization over in-bounds taps
void blur_axis(const std::vector<double>& in, std::vector<double>& out, int width, int height,
               const std::vector<double>& kernel, bool along_x) {
    const int radius = static_cast<int>(kernel.size() / 2);
    const int run = along_x ? width : height;
    const int lines = along_x ? height : width;
    for (int line = 0; line < lines; ++line) {
        for (int i = 0; i < run; ++i) {
            double acc = 0.0, weight = 0.0;
            for (int o = -radius; o <= radius; ++o) {
                const int j = i + o;
                if (j < 0 || j >= run) continue;
                const double w = kernel[static_cast<std::size_t>(o + radius)];
                const std::size_t idx = along_x
                                            ? static_cast<std::size_t>(line) * width + j
                                            : static_cast<std::size_t>(j) * width + line;
                acc += w * in[idx];
                weight += w;
            }
            const std::size_t idx = along_x ? static_cast<std::size_t>(line) * width + i
                                            : static_cast<std::size_t>(i) * width + line;
            out[idx] = acc / weight;
        }
    }
}

}  // namespace

std::vector<double> gaussian_blur(const std::vector<double>& map, int width, int height,
                                  double sigma_g) {
    if (!(sigma_g > 0.0)) throw std::invalid_argument("gaussian_blur: sigma must be > 0");
    if (width < 1 || height < 1 ||
        map.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("gaussian_blur: map size does not match " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
    const std::vector<double> kernel = gaussian_kernel(sigma_g);
    std::vector<double> tmp(map.size()), out(map.size());
    blur_axis(map, tmp, width, height, kernel, true);
    blur_axis(tmp, out, width, height, kernel, false);
    return out;
}

std::optional<JointDetection> extract_joint(const std::vector<double>& channel, int width,
                                            int height, double sigma_g, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw std::invalid_argument("extract_joint: tau must be in (0, 1)");
    }
    const std::vector<double> blurred = gaussian_blur(channel, width, height, sigma_g);
    std::optional<JointDetection> best;
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            const std::size_t idx = static_cast<std::size_t>(v) * width + u;
            if (blurred[idx] < tau) continue;
            // strict > keeps the first (smallest (v, u)) among ties
            if (!best || channel[idx] > best->confidence) {
                best = JointDetection{u, v, channel[idx], true};
            }
        }
    }
    return best;
}

Skeleton2D extract_skeleton(const HeatmapStack& stack,
                            const std::vector<std::pair<int, int>>& connectivity,
                            double sigma_g, double tau) {
    for (const auto& [a, b] : connectivity) {
        if (a < 0 || a >= stack.K || b < 0 || b >= stack.K) {
            throw std::invalid_argument("extract_skeleton: bone (" + std::to_string(a) + ", " +
                                        std::to_string(b) + ") outside 0.." +
                                        std::to_string(stack.K - 1));
        }
    }
    Skeleton2D skel;
    skel.bones = connectivity;
    for (int k = 0; k < stack.K; ++k) {
        const std::vector<double> channel(stack.channel(k),
                                          stack.channel(k) + static_cast<std::size_t>(stack.width) *
                                                                 stack.height);
        const auto joint = extract_joint(channel, stack.width, stack.height, sigma_g, tau);
        skel.joints.push_back(joint.value_or(JointDetection{}));
    }
    return skel;
}

double pck(const Skeleton2D& pred, const Skeleton2D& gt, double alpha, double ref_scale) {
    if (pred.joints.size() != gt.joints.size()) {
        throw std::invalid_argument("pck: skeletons have " + std::to_string(pred.joints.size()) +
                                    " vs " + std::to_string(gt.joints.size()) + " joints");
    }
    if (!(ref_scale > 0.0)) throw std::invalid_argument("pck: ref_scale must be > 0");
    int considered = 0, correct = 0;
    const double limit = alpha * ref_scale;
    for (std::size_t k = 0; k < gt.joints.size(); ++k) {
        if (!gt.joints[k].present) continue;
        ++considered;
        if (!pred.joints[k].present) continue;
        const double du = pred.joints[k].u - gt.joints[k].u;
        const double dv = pred.joints[k].v - gt.joints[k].v;
        if (std::sqrt(du * du + dv * dv) <= limit) ++correct;
    }
    return considered == 0 ? 0.0 : static_cast<double>(correct) / considered;
}

double pck_ref_scale(const Skeleton2D& gt) {
    double min_u = 0.0, max_u = 0.0, min_v = 0.0, max_v = 0.0;
    bool any = false;
    for (const JointDetection& j : gt.joints) {
        if (!j.present) continue;
        if (!any) {
            min_u = max_u = j.u;
            min_v = max_v = j.v;
            any = true;
        } else {
            min_u = std::min(min_u, static_cast<double>(j.u));
            max_u = std::max(max_u, static_cast<double>(j.u));
            min_v = std::min(min_v, static_cast<double>(j.v));
            max_v = std::max(max_v, static_cast<double>(j.v));
        }
    }
    if (!any) throw std::invalid_argument("pck_ref_scale: no present joints");
    const double du = max_u - min_u, dv = max_v - min_v;
    return std::sqrt(du * du + dv * dv);
}

std::string skeleton_to_json(const Skeleton2D& skel, double sigma_g, double tau) {
    nlohmann::json j;
    j["sigma_g"] = sigma_g;
    j["tau"] = tau;
    auto joints = nlohmann::json::array();
    for (std::size_t k = 0; k < skel.joints.size(); ++k) {
        const JointDetection& jd = skel.joints[k];
        joints.push_back({{"k", k},
                          {"u", jd.u},
                          {"v", jd.v},
                          {"confidence", jd.confidence},
                          {"present", jd.present}});
    }
    j["joints"] = joints;
    auto bones = nlohmann::json::array();
    for (const auto& [a, b] : skel.bones) bones.push_back({a, b});
    j["bones"] = bones;
    return j.dump(2) + "\n";
}

std::string skeleton_to_svg(const Skeleton2D& skel, int width, int height,
                            const std::string& image_href) {
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    if (!image_href.empty()) {
        svg << "  <image href=\"" << image_href << "\" width=\"" << width << "\" height=\""
            << height << "\"/>\n";
    }
    for (const auto& [a, b] : skel.bones) {
        const JointDetection& ja = skel.joints[static_cast<std::size_t>(a)];
        const JointDetection& jb = skel.joints[static_cast<std::size_t>(b)];
        if (!ja.present || !jb.present) continue;
        svg << "  <line x1=\"" << ja.u + 0.5 << "\" y1=\"" << ja.v + 0.5 << "\" x2=\""
            << jb.u + 0.5 << "\" y2=\"" << jb.v + 0.5
            << "\" stroke=\"#00c853\" stroke-width=\"0.8\"/>\n";
    }
    for (const JointDetection& j : skel.joints) {
        if (!j.present) continue;
        svg << "  <circle cx=\"" << j.u + 0.5 << "\" cy=\"" << j.v + 0.5
            << "\" r=\"1.2\" fill=\"#d50000\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace hfnerf
