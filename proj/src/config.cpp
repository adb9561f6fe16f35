#include "hfnerf/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hfnerf {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

template <typename T, typename Parse>
T lookup(const ConfigMap& cfg, const std::string& key, T fallback, Parse parse) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    try {
        std::size_t used = 0;
        const T v = parse(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' has malformed value '" +
                                    it->second + "'");
    }
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value: '" + stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " has an empty key");
        }
        cfg[key] = value;
    }
    return cfg;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

double config_double(const ConfigMap& cfg, const std::string& key, double fallback) {
    return lookup<double>(cfg, key, fallback,
                          [](const std::string& s, std::size_t* used) { return std::stod(s, used); });
}

int config_int(const ConfigMap& cfg, const std::string& key, int fallback) {
    return lookup<int>(cfg, key, fallback, [](const std::string& s, std::size_t* used) {
        return std::stoi(s, used);
    });
}

std::uint64_t config_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback) {
    return lookup<std::uint64_t>(cfg, key, fallback, [](const std::string& s, std::size_t* used) {
        return static_cast<std::uint64_t>(std::stoull(s, used));
    });
}

FieldConfig field_config_from(const ConfigMap& cfg) {
    FieldConfig f;
    f.trunk_width = config_int(cfg, "trunk_width", f.trunk_width);
    f.trunk_depth = config_int(cfg, "trunk_depth", f.trunk_depth);
    f.skip_at = config_int(cfg, "skip_at", f.skip_at);
    f.head_width = config_int(cfg, "head_width", f.head_width);
    f.L_x = config_int(cfg, "L_x", f.L_x);
    f.L_d = config_int(cfg, "L_d", f.L_d);
    return f;
}

TrainConfig train_config_from(const ConfigMap& cfg) {
    TrainConfig t;
    t.lambda_h = config_double(cfg, "lambda_h", t.lambda_h);
    t.lr = config_double(cfg, "lr", t.lr);
    t.beta1 = config_double(cfg, "beta1", t.beta1);
    t.beta2 = config_double(cfg, "beta2", t.beta2);
    t.eps = config_double(cfg, "eps", t.eps);
    t.iters = config_int(cfg, "iters", t.iters);
    t.rays_per_batch = config_int(cfg, "rays_per_batch", t.rays_per_batch);
    t.n_samples = config_int(cfg, "n_samples", t.n_samples);
    t.seed = config_u64(cfg, "seed", t.seed);
    t.log_every = config_int(cfg, "log_every", t.log_every);
    t.checkpoint_every = config_int(cfg, "checkpoint_every", t.checkpoint_every);
    return t;
}

std::string resolved_config_text(const FieldConfig& field_cfg, const TrainConfig& train_cfg) {
    std::ostringstream out;
    char buf[64];
    const auto put_num = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << key << " = " << buf << "\n";
    };
    // alphabetical, matching the sorted ConfigMap iteration order
    out << "L_d = " << field_cfg.L_d << "\n";
    out << "L_x = " << field_cfg.L_x << "\n";
    put_num("beta1", train_cfg.beta1);
    put_num("beta2", train_cfg.beta2);
    out << "checkpoint_every = " << train_cfg.checkpoint_every << "\n";
    put_num("eps", train_cfg.eps);
    out << "head_width = " << field_cfg.head_width << "\n";
    out << "iters = " << train_cfg.iters << "\n";
    put_num("lambda_h", train_cfg.lambda_h);
    out << "log_every = " << train_cfg.log_every << "\n";
    put_num("lr", train_cfg.lr);
    out << "n_samples = " << train_cfg.n_samples << "\n";
    out << "rays_per_batch = " << train_cfg.rays_per_batch << "\n";
    out << "seed = " << train_cfg.seed << "\n";
    out << "skip_at = " << field_cfg.skip_at << "\n";
    out << "trunk_depth = " << field_cfg.trunk_depth << "\n";
    out << "trunk_width = " << field_cfg.trunk_width << "\n";
    return out.str();
}

}  // namespace hfnerf
