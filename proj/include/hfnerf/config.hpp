#pragma once

#include <map>
#include <string>

#include "hfnerf/field.hpp"
#include "hfnerf/training.hpp"

namespace hfnerf {

// Flat key=value configuration. '#' starts a comment; keys and values are
// whitespace-trimmed. Later duplicates win (so CLI overrides can be merged by
// assignment).
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_file(const std::string& path);
ConfigMap parse_config_text(const std::string& text);

// Typed lookups; a present but malformed value throws naming the key.
double config_double(const ConfigMap& cfg, const std::string& key, double fallback);
int config_int(const ConfigMap& cfg, const std::string& key, int fallback);
std::uint64_t config_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback);

// Keys: trunk_width, trunk_depth, skip_at, head_width, L_x, L_d. K and F_dim
// always come from the dataset, never from config.
FieldConfig field_config_from(const ConfigMap& cfg);
// Keys: lambda_h, lr, beta1, beta2, eps, iters, rays_per_batch, n_samples,
// seed, log_every, checkpoint_every.
TrainConfig train_config_from(const ConfigMap& cfg);

// The full effective configuration (defaults overlaid with cfg), one sorted
// "key = value" line each; echoed by every CLI command so runs are
// reproducible from their logs.
std::string resolved_config_text(const FieldConfig& field_cfg, const TrainConfig& train_cfg);

}  // namespace hfnerf
