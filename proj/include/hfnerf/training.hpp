#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfnerf/checkpoint.hpp"
#include "hfnerf/dataset.hpp"
#include "hfnerf/field.hpp"
#include "hfnerf/tensor.hpp"

namespace hfnerf {

struct TrainConfig {
    double lambda_h = 0.5;  // heatmap loss weight
    double lr = 5e-4;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int iters = 2000;
    int rays_per_batch = 512;
    int n_samples = 48;
    std::uint64_t seed = 0;
    int log_every = 100;
    int checkpoint_every = 1000;
};
void validate(const TrainConfig& cfg);

struct LossTerms {
    double l_c = 0.0, l_h = 0.0, total = 0.0;  // total = l_c + lambda_h * l_h
};

// Tape-connected loss over a rendered batch [R, 3+K+1] (color, heat,
// opacity columns as produced by render_rays). Color is compared against
// gt_color [R,3], heat against teacher_heat [R,K]; the opacity column is
// unsupervised. Both terms are plain MSE.
struct LossBundle {
    ad::Tensor l_c, l_h, total;
    LossTerms scalars() const;
};
LossBundle loss(const ad::Tensor& rendered, const ad::Tensor& gt_color,
                const ad::Tensor& teacher_heat, double lambda_h);

// Adam with bias correction over a fixed parameter list. step() consumes the
// grad buffers currently on the tensors.
class Adam {
public:
    Adam(ad::NamedParams params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);
    void step();
    int t() const { return t_; }

private:
    ad::NamedParams params_;
    std::vector<std::vector<double>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
};

struct LogEntry {
    int iter = 0;
    LossTerms terms;
};

struct TrainResult {
    FieldParams params;
    std::vector<LogEntry> log;
};

// The distillation loop: per iteration, rays_per_batch random (train view,
// pixel) pairs are rendered with jittered stratified samples and fit to the
// view's color and teacher heatmaps. Logs every log_every iters; with a
// nonempty out_dir writes train_log.csv, checkpoint_<iter>.bin every
// checkpoint_every iters and checkpoint_final.bin at the end. Deterministic
// per seed in single-threaded mode. field_cfg.K and F_dim are overridden
// from the dataset. Non-finite loss aborts with the iteration number.
TrainResult train(const Dataset& ds, FieldConfig field_cfg, const TrainConfig& cfg,
                  const std::string& out_dir = "");

}  // namespace hfnerf
