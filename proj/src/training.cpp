#include "hfnerf/training.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hfnerf/kernels.hpp"
#include "hfnerf/ops.hpp"
#include "hfnerf/rendering.hpp"
#include "hfnerf/rng.hpp"

namespace hfnerf {

void validate(const TrainConfig& cfg) {
    if (cfg.lambda_h < 0.0) throw std::invalid_argument("train config: lambda_h must be >= 0");
    if (!(cfg.lr > 0.0)) throw std::invalid_argument("train config: lr must be > 0");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
        throw std::invalid_argument("train config: betas must lie in [0, 1)");
    }
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("train config: eps must be > 0");
    if (cfg.iters < 1) throw std::invalid_argument("train config: iters must be >= 1");
    if (cfg.rays_per_batch < 1 || cfg.n_samples < 1) {
        throw std::invalid_argument("train config: rays_per_batch and n_samples must be >= 1");
    }
    if (cfg.log_every < 1 || cfg.checkpoint_every < 1) {
        throw std::invalid_argument("train config: log/checkpoint intervals must be >= 1");
    }
}

LossTerms LossBundle::scalars() const {
    return {l_c.values()[0], l_h.values()[0], total.values()[0]};
}

LossBundle loss(const ad::Tensor& rendered, const ad::Tensor& gt_color,
                const ad::Tensor& teacher_heat, double lambda_h) {
    if (rendered.rank() != 2 || rendered.dim(1) < 4) {
        throw std::invalid_argument("loss: rendered batch must be [R, 3+K+1], got " +
                                    ad::shape_str(rendered.shape()));
    }
    const int R = rendered.dim(0);
    const int K = rendered.dim(1) - 4;
    if (gt_color.rank() != 2 || gt_color.dim(0) != R || gt_color.dim(1) != 3) {
        throw std::invalid_argument("loss: gt_color " + ad::shape_str(gt_color.shape()) +
                                    " does not match " + std::to_string(R) + " rays");
    }
    if (teacher_heat.rank() != 2 || teacher_heat.dim(0) != R || teacher_heat.dim(1) != K) {
        throw std::invalid_argument("loss: teacher_heat " + ad::shape_str(teacher_heat.shape()) +
                                    " does not match [" + std::to_string(R) + ", " +
                                    std::to_string(K) + "]");
    }
    if (lambda_h < 0.0) throw std::invalid_argument("loss: lambda_h must be >= 0");

    LossBundle out;
    out.l_c = ad::squared_error(ad::slice_cols(rendered, 0, 3), gt_color);
    out.l_h = ad::squared_error(ad::slice_cols(rendered, 3, 3 + K), teacher_heat);
    out.total = ad::add(out.l_c, ad::mul(ad::Tensor::scalar(lambda_h), out.l_h));
    return out;
}

Adam::Adam(ad::NamedParams params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& [name, t] : params_) {
        (void)name;
        m_.emplace_back(t.values().size(), 0.0);
        v_.emplace_back(t.values().size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 / (1.0 - std::pow(beta1_, t_));
    const double bc2 = 1.0 / (1.0 - std::pow(beta2_, t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        ad::Tensor& t = params_[i].second;
        if (t.grad().size() != t.values().size()) {
            throw std::logic_error("adam: parameter " + params_[i].first +
                                   " has no gradient; was backward() run?");
        }
        kern::adam_update(static_cast<std::int64_t>(t.values().size()), t.values().data(),
                          m_[i].data(), v_[i].data(), t.grad().data(), lr_, beta1_, beta2_, eps_,
                          bc1, bc2);
    }
}

namespace {

std::string checkpoint_name(int iter) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "checkpoint_%06d.bin", iter);
    return buf;
}

std::string csv_line(const LogEntry& e) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g", e.iter, e.terms.l_c, e.terms.l_h,
                  e.terms.total);
    return buf;
}

}  // namespace

TrainResult train(const Dataset& ds, FieldConfig field_cfg, const TrainConfig& cfg,
                  const std::string& out_dir) {
    namespace fs = std::filesystem;
    validate(cfg);
    if (ds.train_views.empty()) throw std::invalid_argument("train: dataset has no training views");
    for (int vi : ds.train_views) {
        const DatasetView& v = ds.views[static_cast<std::size_t>(vi)];
        if (v.heatmaps.values.empty()) {
            throw std::invalid_argument("train: view " + v.name + " has no teacher heatmaps");
        }
        if (v.features.values.empty()) {
            throw std::invalid_argument("train: view " + v.name + " has no feature map");
        }
    }

    field_cfg.K = ds.scene.joint_count();
    const DatasetView& source_view = ds.views[static_cast<std::size_t>(ds.train_views[0])];
    field_cfg.F_dim = source_view.features.dim;
    validate(field_cfg);

    FieldParams params = field_init(field_cfg, cfg.seed);
    Adam opt(named_params(params), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    const RenderSource source{source_view.camera, &source_view.features};

    std::ofstream csv;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        csv.open(fs::path(out_dir) / "train_log.csv");
        if (!csv) throw std::runtime_error("train: cannot write log under " + out_dir);
        csv << "iter,l_c,l_h,total\n";
    }

    // ray sampling gets its own stream so render-side draws never shift it
    Rng sampler(mix_seed(cfg.seed, 0x7261795f73616d70ULL));
    const int K = field_cfg.K;
    const int R = cfg.rays_per_batch;

    TrainResult result;
    std::vector<Ray> rays(static_cast<std::size_t>(R));
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(R));
    std::vector<double> gt_color(static_cast<std::size_t>(R) * 3);
    std::vector<double> teacher(static_cast<std::size_t>(R) * K);

    for (int iter = 1; iter <= cfg.iters; ++iter) {
        for (int j = 0; j < R; ++j) {
            const int vi = ds.train_views[sampler.below(ds.train_views.size())];
            const DatasetView& view = ds.views[static_cast<std::size_t>(vi)];
            const int px = static_cast<int>(sampler.below(static_cast<std::uint64_t>(view.camera.width)));
            const int py = static_cast<int>(sampler.below(static_cast<std::uint64_t>(view.camera.height)));
            rays[static_cast<std::size_t>(j)] = ray_for_pixel(view.camera, px, py, ds.near, ds.far);
            seeds[static_cast<std::size_t>(j)] = mix_seed(cfg.seed, static_cast<std::uint64_t>(iter),
                                                          static_cast<std::uint64_t>(j));
            for (int c = 0; c < 3; ++c) gt_color[static_cast<std::size_t>(j) * 3 + c] = view.image.at(px, py, c);
            for (int k = 0; k < K; ++k) {
                teacher[static_cast<std::size_t>(j) * K + k] = view.heatmaps.at(k, px, py);
            }
        }

        LossTerms terms;
        {
            ad::TapeScope scope;
            const ad::Tensor rendered = render_rays(params, rays, seeds, source, cfg.n_samples, true);
            const LossBundle bundle =
                loss(rendered, ad::Tensor::from_values({R, 3}, gt_color),
                     ad::Tensor::from_values({R, K}, teacher), cfg.lambda_h);
            terms = bundle.scalars();
            if (!std::isfinite(terms.total)) {
                throw std::runtime_error("train: non-finite loss at iteration " +
                                         std::to_string(iter));
            }
            ad::backward(bundle.total);
        }
        opt.step();

        if (iter % cfg.log_every == 0) {
            result.log.push_back({iter, terms});
            if (csv.is_open()) csv << csv_line(result.log.back()) << "\n" << std::flush;
        }
        if (!out_dir.empty() && iter % cfg.checkpoint_every == 0 && iter != cfg.iters) {
            ad::save_checkpoint((fs::path(out_dir) / checkpoint_name(iter)).string(),
                                named_params(params));
        }
    }

    if (!out_dir.empty()) {
        ad::save_checkpoint((fs::path(out_dir) / "checkpoint_final.bin").string(),
                            named_params(params));
    }
    result.params = std::move(params);
    return result;
}

}  // namespace hfnerf
