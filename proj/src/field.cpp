#include "hfnerf/field.hpp"

#include <stdexcept>
#include <string>
#include <unordered_map>

#include "hfnerf/ops.hpp"
#include "hfnerf/rng.hpp"

namespace hfnerf {

namespace {

int trunk_layer_in(const FieldConfig& cfg, int layer) {
    if (layer == 0) return trunk_in_len(cfg);
    return layer == cfg.skip_at ? cfg.trunk_width + trunk_in_len(cfg) : cfg.trunk_width;
}

}  // namespace

void validate(const FieldConfig& cfg) {
    if (cfg.trunk_width <= 0 || cfg.trunk_depth <= 0 || cfg.head_width <= 0) {
        throw std::invalid_argument("field config: non-positive layer sizes");
    }
    if (!(cfg.skip_at > 0 && cfg.skip_at < cfg.trunk_depth)) {
        throw std::invalid_argument("field config: skip_at must satisfy 0 < skip_at < trunk_depth, got " +
                                    std::to_string(cfg.skip_at) + " with depth " +
                                    std::to_string(cfg.trunk_depth));
    }
    if (cfg.K < 1) throw std::invalid_argument("field config: K must be >= 1");
    if (cfg.L_x < 0 || cfg.L_d < 0) throw std::invalid_argument("field config: negative band count");
    if (cfg.F_dim < 0) throw std::invalid_argument("field config: negative feature length");
}

FieldParams field_init(const FieldConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    FieldParams p;
    p.cfg = cfg;
    for (int i = 0; i < cfg.trunk_depth; ++i) {
        auto wb = ad::init_parameters({trunk_layer_in(cfg, i), cfg.trunk_width},
                                      mix_seed(seed, static_cast<std::uint64_t>(i)));
        p.trunk_w.push_back(wb[0]);
        p.trunk_b.push_back(wb[1]);
    }
    auto heat = ad::init_parameters({cfg.trunk_width, cfg.head_width, cfg.K}, mix_seed(seed, 100));
    p.heat0_w = heat[0];
    p.heat0_b = heat[1];
    p.heat1_w = heat[2];
    p.heat1_b = heat[3];
    auto sigma = ad::init_parameters({cfg.trunk_width, 1}, mix_seed(seed, 101));
    p.sigma_w = sigma[0];
    p.sigma_b = sigma[1];
    auto color = ad::init_parameters({cfg.trunk_width + gamma_d_len(cfg), 3}, mix_seed(seed, 102));
    p.color_w = color[0];
    p.color_b = color[1];
    return p;
}

std::int64_t param_count(const FieldConfig& cfg) {
    std::int64_t n = 0;
    for (int i = 0; i < cfg.trunk_depth; ++i) {
        n += static_cast<std::int64_t>(trunk_layer_in(cfg, i)) * cfg.trunk_width + cfg.trunk_width;
    }
    n += static_cast<std::int64_t>(cfg.trunk_width) * cfg.head_width + cfg.head_width;
    n += static_cast<std::int64_t>(cfg.head_width) * cfg.K + cfg.K;
    n += cfg.trunk_width + 1;
    n += static_cast<std::int64_t>(cfg.trunk_width + gamma_d_len(cfg)) * 3 + 3;
    return n;
}

ad::NamedParams named_params(const FieldParams& p) {
    ad::NamedParams out;
    for (std::size_t i = 0; i < p.trunk_w.size(); ++i) {
        out.emplace_back("trunk." + std::to_string(i) + ".w", p.trunk_w[i]);
        out.emplace_back("trunk." + std::to_string(i) + ".b", p.trunk_b[i]);
    }
    out.emplace_back("heat.0.w", p.heat0_w);
    out.emplace_back("heat.0.b", p.heat0_b);
    out.emplace_back("heat.1.w", p.heat1_w);
    out.emplace_back("heat.1.b", p.heat1_b);
    out.emplace_back("sigma.w", p.sigma_w);
    out.emplace_back("sigma.b", p.sigma_b);
    out.emplace_back("color.w", p.color_w);
    out.emplace_back("color.b", p.color_b);
    return out;
}

FieldParams params_from_checkpoint(const ad::NamedParams& named, int F_dim) {
    std::unordered_map<std::string, ad::Tensor> by_name;
    for (const auto& [name, t] : named) by_name.emplace(name, t);
    auto get = [&](const std::string& name) -> ad::Tensor {
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            throw std::runtime_error("checkpoint is missing parameter: " + name);
        }
        return it->second;
    };

    FieldParams p;
    int depth = 0;
    while (by_name.count("trunk." + std::to_string(depth) + ".w")) ++depth;
    if (depth == 0) throw std::runtime_error("checkpoint has no trunk layers");

    FieldConfig cfg;
    cfg.trunk_depth = depth;
    const ad::Tensor w0 = get("trunk.0.w");
    cfg.trunk_width = w0.dim(1);
    const int trunk_in = w0.dim(0);
    cfg.F_dim = F_dim;
    if ((trunk_in - 3 - F_dim) % 6 != 0 || trunk_in - 3 - F_dim < 0) {
        throw std::runtime_error("checkpoint trunk input " + std::to_string(trunk_in) +
                                 " is inconsistent with feature length " + std::to_string(F_dim));
    }
    cfg.L_x = (trunk_in - 3 - F_dim) / 6;
    cfg.skip_at = -1;
    for (int i = 1; i < depth; ++i) {
        const int in = get("trunk." + std::to_string(i) + ".w").dim(0);
        if (in == cfg.trunk_width + trunk_in) {
            if (cfg.skip_at != -1) throw std::runtime_error("checkpoint has multiple skip layers");
            cfg.skip_at = i;
        } else if (in != cfg.trunk_width) {
            throw std::runtime_error("checkpoint trunk layer " + std::to_string(i) +
                                     " has unexpected input width " + std::to_string(in));
        }
    }
    if (cfg.skip_at == -1) throw std::runtime_error("checkpoint has no skip layer");
    cfg.head_width = get("heat.0.w").dim(1);
    cfg.K = get("heat.1.w").dim(1);
    const int color_in = get("color.w").dim(0);
    const int gd = color_in - cfg.trunk_width;
    if (gd < 3 || (gd - 3) % 6 != 0) {
        throw std::runtime_error("checkpoint color head input " + std::to_string(color_in) +
                                 " is inconsistent with trunk width " +
                                 std::to_string(cfg.trunk_width));
    }
    cfg.L_d = (gd - 3) / 6;
    validate(cfg);

    p.cfg = cfg;
    for (int i = 0; i < depth; ++i) {
        p.trunk_w.push_back(get("trunk." + std::to_string(i) + ".w"));
        p.trunk_b.push_back(get("trunk." + std::to_string(i) + ".b"));
    }
    p.heat0_w = get("heat.0.w");
    p.heat0_b = get("heat.0.b");
    p.heat1_w = get("heat.1.w");
    p.heat1_b = get("heat.1.b");
    p.sigma_w = get("sigma.w");
    p.sigma_b = get("sigma.b");
    p.color_w = get("color.w");
    p.color_b = get("color.b");
    return p;
}

FieldBatch field_forward_batch(const FieldParams& p, const ad::Tensor& gamma_x,
                               const ad::Tensor& gamma_d, const ad::Tensor& feature) {
    const FieldConfig& cfg = p.cfg;
    if (gamma_x.rank() != 2 || gamma_x.dim(1) != gamma_x_len(cfg)) {
        throw std::invalid_argument("field forward: gamma_x " + ad::shape_str(gamma_x.shape()) +
                                    " does not match encoding length " +
                                    std::to_string(gamma_x_len(cfg)));
    }
    if (gamma_d.rank() != 2 || gamma_d.dim(1) != gamma_d_len(cfg)) {
        throw std::invalid_argument("field forward: gamma_d " + ad::shape_str(gamma_d.shape()) +
                                    " does not match encoding length " +
                                    std::to_string(gamma_d_len(cfg)));
    }
    if (feature.rank() != 2 || feature.dim(1) != cfg.F_dim) {
        throw std::invalid_argument("field forward: feature " + ad::shape_str(feature.shape()) +
                                    " does not match feature length " + std::to_string(cfg.F_dim));
    }

    const ad::Tensor trunk_in = ad::concat(gamma_x, feature);
    ad::Tensor h = ad::relu(ad::linear(trunk_in, p.trunk_w[0], p.trunk_b[0]));
    ad::Tensor h_skip;
    for (int i = 1; i < cfg.trunk_depth; ++i) {
        const ad::Tensor in = i == cfg.skip_at ? ad::concat(h, trunk_in) : h;
        h = ad::relu(ad::linear(in, p.trunk_w[static_cast<std::size_t>(i)],
                                p.trunk_b[static_cast<std::size_t>(i)]));
        if (i == cfg.skip_at) h_skip = h;
    }

    FieldBatch out;
    const ad::Tensor hh = ad::relu(ad::linear(h_skip, p.heat0_w, p.heat0_b));
    out.heat_logits = ad::linear(hh, p.heat1_w, p.heat1_b);
    out.sigma = ad::softplus(ad::linear(h, p.sigma_w, p.sigma_b));
    out.color = ad::sigmoid(ad::linear(ad::concat(h, gamma_d), p.color_w, p.color_b));
    return out;
}

FieldOutput field_forward(const FieldParams& p, const EncodedPoint& enc) {
    using ad::Tensor;
    const auto row = [](const std::vector<double>& v) {
        return Tensor::from_values({1, static_cast<int>(v.size())}, v);
    };
    const FieldBatch batch =
        field_forward_batch(p, row(enc.gamma_x), row(enc.gamma_d), row(enc.feature));
    FieldOutput out;
    out.color = {batch.color.values()[0], batch.color.values()[1], batch.color.values()[2]};
    out.sigma = batch.sigma.values()[0];
    out.heatmap_logits = batch.heat_logits.values();
    return out;
}

}  // namespace hfnerf
