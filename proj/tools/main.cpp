#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hfnerf/config.hpp"
#include "hfnerf/dataset.hpp"
#include "hfnerf/eval.hpp"
#include "hfnerf/metrics.hpp"
#include "hfnerf/rendering.hpp"
#include "hfnerf/skeleton.hpp"
#include "hfnerf/training.hpp"

namespace fs = std::filesystem;
using namespace hfnerf;

namespace {

const char* image_ext() {
#ifdef HFNERF_HAVE_PNG
    return ".png";
#else
    return ".ppm";
#endif
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// Field parameters reconstructed from a checkpoint; the feature length comes
// from the dataset the field will render with.
FieldParams load_field(const std::string& ckpt, const Dataset& ds) {
    const int f_dim = ds.views[static_cast<std::size_t>(ds.train_views.at(0))].features.dim;
    return params_from_checkpoint(ad::load_checkpoint(ckpt), f_dim);
}

struct ConfigArgs {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // key -> raw value

    void add_to(CLI::App* cmd, const std::vector<std::string>& keys) {
        cmd->add_option("--config", config_path, "flat key=value config file");
        overrides.reserve(keys.size());
        for (const std::string& key : keys) {
            overrides.emplace_back(key, "");
            cmd->add_option("--" + key, overrides.back().second, "overrides config key " + key);
        }
    }

    ConfigMap resolve() const {
        ConfigMap cfg;
        if (!config_path.empty()) cfg = parse_config_file(config_path);
        for (const auto& [key, value] : overrides) {
            if (!value.empty()) cfg[key] = value;
        }
        return cfg;
    }
};

const std::vector<std::string> kTrainKeys = {
    "lambda_h", "lr",        "beta1",      "beta2",       "eps",        "iters",
    "rays_per_batch", "n_samples", "seed", "log_every", "checkpoint_every",
    "trunk_width", "trunk_depth", "skip_at", "head_width", "L_x", "L_d"};

void cmd_gen_data(std::uint64_t seed, int views_train, int views_test, int size,
                  const std::string& out, double teacher_sigma, bool occlusion_cull) {
    std::cout << "occlusion_cull = " << (occlusion_cull ? "true" : "false") << "\n"
              << "out = " << out << "\n"
              << "seed = " << seed << "\n"
              << "size = " << size << "\n"
              << "teacher_sigma = " << teacher_sigma << "\n"
              << "views_test = " << views_test << "\n"
              << "views_train = " << views_train << "\n";
    const Dataset ds = generate_dataset(seed, views_train, views_test, size, out, teacher_sigma,
                                        occlusion_cull);
    std::cout << "wrote " << ds.views.size() << " views ("
              << ds.train_views.size() << " train, " << ds.test_views.size() << " test) under "
              << out << "\n";
}

void cmd_train(const std::string& data, const std::string& out, const ConfigArgs& args) {
    const ConfigMap cfg = args.resolve();
    const FieldConfig field_cfg = field_config_from(cfg);
    const TrainConfig train_cfg = train_config_from(cfg);
    std::cout << resolved_config_text(field_cfg, train_cfg) << "data = " << data
              << "\nout = " << out << "\n";

    const Dataset ds = load_dataset(data);
    const TrainResult result = train(ds, field_cfg, train_cfg, out);
    if (!result.log.empty()) {
        const LogEntry& last = result.log.back();
        std::cout << "final loss at iter " << last.iter << ": total " << last.terms.total
                  << " (color " << last.terms.l_c << ", heat " << last.terms.l_h << ")\n";
    }
    std::cout << "checkpoint: " << (fs::path(out) / "checkpoint_final.bin").string() << "\n";
}

void cmd_render(const std::string& ckpt, const std::string& data, int view_index,
                const std::string& out, int n_samples) {
    std::cout << "ckpt = " << ckpt << "\ndata = " << data << "\nn_samples = " << n_samples
              << "\nout = " << out << "\nview = " << view_index << "\n";
    const Dataset ds = load_dataset(data);
    if (view_index < 0 || view_index >= static_cast<int>(ds.views.size())) {
        throw std::runtime_error("render: view " + std::to_string(view_index) +
                                 " out of range, dataset has " + std::to_string(ds.views.size()));
    }
    const FieldParams params = load_field(ckpt, ds);
    const DatasetView& source_view = ds.views[static_cast<std::size_t>(ds.train_views.at(0))];
    const RenderSource source{source_view.camera, &source_view.features};
    const DatasetView& view = ds.views[static_cast<std::size_t>(view_index)];

    const RenderedImage rendered =
        render_image(params, view.camera, source, n_samples, ds.near, ds.far);
    fs::create_directories(out);
    const std::string stem = "render_" + view.name;
    const fs::path rgb = fs::path(out) / (stem + image_ext());
    const fs::path heat = fs::path(out) / (stem + ".heat");
    const fs::path opacity = fs::path(out) / (stem + "_opacity" + image_ext());
    write_image(rgb.string(), rendered.image);
    save_heatmaps(heat.string(), rendered.heat);
    Image opacity_img(view.camera.width, view.camera.height);
    for (int y = 0; y < opacity_img.height; ++y) {
        for (int x = 0; x < opacity_img.width; ++x) {
            const double a = rendered.opacity[static_cast<std::size_t>(y) * opacity_img.width + x];
            for (int c = 0; c < 3; ++c) opacity_img.at(x, y, c) = a;
        }
    }
    write_image(opacity.string(), opacity_img);
    std::cout << "wrote " << rgb.string() << ", " << heat.string() << ", " << opacity.string()
              << "\n";
}

void cmd_eval(const std::string& ckpt, const std::string& data, const std::string& out,
              int n_samples, double sigma_g, double tau, double alpha) {
    std::cout << "alpha = " << alpha << "\nckpt = " << ckpt << "\ndata = " << data
              << "\nn_samples = " << n_samples << "\nout = " << out << "\nsigma_g = " << sigma_g
              << "\ntau = " << tau << "\n";
    const Dataset ds = load_dataset(data);
    const FieldParams params = load_field(ckpt, ds);
    const EvalReport report = evaluate(params, ds, n_samples, sigma_g, tau, alpha);
    fs::create_directories(out);
    const fs::path path = fs::path(out) / "metrics.json";
    write_text(path, eval_report_json(report));
    std::cout << "means: psnr " << psnr_json_value(report.mean.psnr) << " dB, ssim "
              << report.mean.ssim << ", mse_color " << report.mean.mse_color << ", mse_heat "
              << report.mean.mse_heat << ", pck " << report.mean.pck << "\n"
              << "wrote " << path.string() << "\n";
}

void cmd_skeleton(const std::string& heatmaps, const std::string& out, double sigma_g, double tau,
                  const std::string& image_href) {
    std::cout << "heatmaps = " << heatmaps << "\nimage = " << image_href << "\nout = " << out
              << "\nsigma_g = " << sigma_g << "\ntau = " << tau << "\n";
    const HeatmapStack stack = load_heatmaps(heatmaps);
    std::vector<std::pair<int, int>> connectivity;
    if (stack.K == static_cast<int>(joint_names().size())) {
        for (const CanonicalBone& b : canonical_bones()) connectivity.emplace_back(b.parent, b.child);
    }
    const Skeleton2D skel = extract_skeleton(stack, connectivity, sigma_g, tau);
    if (const fs::path dir = fs::path(out).parent_path(); !dir.empty()) {
        fs::create_directories(dir);
    }
    write_text(out + ".json", skeleton_to_json(skel, sigma_g, tau));
    write_text(out + ".svg", skeleton_to_svg(skel, stack.width, stack.height, image_href));
    int present = 0;
    for (const JointDetection& j : skel.joints) present += j.present ? 1 : 0;
    std::cout << present << "/" << skel.joints.size() << " joints present; wrote " << out
              << ".json and " << out << ".svg\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"feature-conditioned radiance field with distilled joint heatmaps"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic multi-view dataset");
    std::uint64_t seed = 0;
    int views_train = 8, views_test = 2, size = 64;
    std::string gen_out;
    double teacher_sigma = kTeacherSigmaAt64;
    bool occlusion_cull = false;
    gen->add_option("--seed", seed, "scene seed");
    gen->add_option("--views-train", views_train, "training view count");
    gen->add_option("--views-test", views_test, "held-out view count");
    gen->add_option("--size", size, "image width and height");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--teacher-sigma", teacher_sigma, "teacher spread in px at 64x64");
    gen->add_flag("--occlusion-cull", occlusion_cull, "zero teacher channels of buried joints");

    auto* tr = app.add_subcommand("train", "train a field on a generated dataset");
    std::string train_data, train_out;
    ConfigArgs train_args;
    tr->add_option("--data", train_data, "manifest.json path")->required();
    tr->add_option("--out", train_out, "output directory")->required();
    train_args.add_to(tr, kTrainKeys);

    auto* rn = app.add_subcommand("render", "render one dataset view from a checkpoint");
    std::string render_ckpt, render_data, render_out;
    int render_view = 0, render_samples = 48;
    rn->add_option("--ckpt", render_ckpt, "checkpoint path")->required();
    rn->add_option("--data", render_data, "manifest.json path")->required();
    rn->add_option("--view", render_view, "view index into the manifest");
    rn->add_option("--out", render_out, "output directory")->required();
    rn->add_option("--n_samples", render_samples, "samples per ray");

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test views");
    std::string eval_ckpt, eval_data, eval_out;
    int eval_samples = 48;
    double eval_sigma_g = kDefaultSigmaG, eval_tau = kDefaultTau, eval_alpha = 0.1;
    ev->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();
    ev->add_option("--data", eval_data, "manifest.json path")->required();
    ev->add_option("--out", eval_out, "output directory")->required();
    ev->add_option("--n_samples", eval_samples, "samples per ray");
    ev->add_option("--sigma-g", eval_sigma_g, "skeleton blur sigma");
    ev->add_option("--tau", eval_tau, "skeleton mask threshold");
    ev->add_option("--alpha", eval_alpha, "PCK radius fraction");

    auto* sk = app.add_subcommand("skeleton", "extract a 2D skeleton from a heatmap stack");
    std::string sk_heatmaps, sk_out, sk_image;
    double sk_sigma_g = kDefaultSigmaG, sk_tau = kDefaultTau;
    sk->add_option("--heatmaps", sk_heatmaps, "heatmap stack path")->required();
    sk->add_option("--out", sk_out, "output prefix (.json/.svg appended)")->required();
    sk->add_option("--sigma-g", sk_sigma_g, "mask blur sigma");
    sk->add_option("--tau", sk_tau, "mask threshold");
    sk->add_option("--image", sk_image, "raster href for the SVG overlay");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) {
            cmd_gen_data(seed, views_train, views_test, size, gen_out, teacher_sigma,
                         occlusion_cull);
        } else if (tr->parsed()) {
            cmd_train(train_data, train_out, train_args);
        } else if (rn->parsed()) {
            cmd_render(render_ckpt, render_data, render_view, render_out, render_samples);
        } else if (ev->parsed()) {
            cmd_eval(eval_ckpt, eval_data, eval_out, eval_samples, eval_sigma_g, eval_tau,
                     eval_alpha);
        } else if (sk->parsed()) {
            cmd_skeleton(sk_heatmaps, sk_out, sk_sigma_g, sk_tau, sk_image);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
