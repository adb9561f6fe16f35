#pragma once

#include <cstdint>
#include <vector>

#include "hfnerf/checkpoint.hpp"
#include "hfnerf/encoding.hpp"
#include "hfnerf/geometry.hpp"
#include "hfnerf/tensor.hpp"

namespace hfnerf {

// Architecture of the field network. The trunk is an MLP over
// concat(gamma(x), f(x)) with the trunk input re-injected at layer skip_at;
// the heatmap branch taps the activation of that same layer, density reads
// the last activation, and color reads concat(last activation, gamma(d)).
struct FieldConfig {
    int trunk_width = 128;
    int trunk_depth = 6;
    int skip_at = 3;
    int head_width = 64;
    int K = 0;  // joint count
    int L_x = 10;
    int L_d = 4;
    int F_dim = 9;
};

void validate(const FieldConfig& cfg);  // throws std::invalid_argument

inline int gamma_x_len(const FieldConfig& cfg) { return 3 + 6 * cfg.L_x; }
inline int gamma_d_len(const FieldConfig& cfg) { return 3 + 6 * cfg.L_d; }
inline int trunk_in_len(const FieldConfig& cfg) { return gamma_x_len(cfg) + cfg.F_dim; }

struct FieldParams {
    FieldConfig cfg;
    std::vector<ad::Tensor> trunk_w, trunk_b;  // trunk_depth layers
    ad::Tensor heat0_w, heat0_b;               // trunk_width -> head_width
    ad::Tensor heat1_w, heat1_b;               // head_width -> K
    ad::Tensor sigma_w, sigma_b;               // trunk_width -> 1
    ad::Tensor color_w, color_b;               // trunk_width + gamma_d -> 3
};

// Glorot weights, zero biases, deterministic per seed.
FieldParams field_init(const FieldConfig& cfg, std::uint64_t seed);

// closed-form trainable scalar count for cfg
std::int64_t param_count(const FieldConfig& cfg);

// Stable checkpoint naming: trunk.<i>.w/.b, heat.0/1.w/.b, sigma.w/.b, color.w/.b.
ad::NamedParams named_params(const FieldParams& params);

// Rebuilds params from a checkpoint. Every config field except F_dim is
// implied by the stored shapes; F_dim (the feature length baked into the
// trunk input) comes from the feature map the caller will render with.
FieldParams params_from_checkpoint(const ad::NamedParams& named, int F_dim);

// Tape-connected outputs for a batch of m encoded points.
struct FieldBatch {
    ad::Tensor color;        // [m, 3], sigmoid-bounded
    ad::Tensor sigma;        // [m, 1], softplus-bounded
    ad::Tensor heat_logits;  // [m, K], unactivated
};

FieldBatch field_forward_batch(const FieldParams& params, const ad::Tensor& gamma_x,
                               const ad::Tensor& gamma_d, const ad::Tensor& feature);

struct FieldOutput {
    Vec3 color;
    double sigma = 0.0;
    std::vector<double> heatmap_logits;
};

// Single-point convenience wrapper over the batch path (same numerics).
FieldOutput field_forward(const FieldParams& params, const EncodedPoint& enc);

}  // namespace hfnerf
