#include "negpr/config.hpp"

#include <fstream>
#include <sstream>

namespace negpr {

using nlohmann::json;

ExperimentConfig desk_preset(ExperimentConfig base) {
    base.source = "synthetic";
    base.target = "synthetic";
    base.hidden = 32;
    base.layers = 2;
    base.pretrain_epochs = 300;
    base.refine_epochs = 5;
    base.iterations = 5;
    base.path_length = 3;
    base.lr = 1e-2;  // full-batch steps need a larger rate than the full-scale default
    base.refine_lr = 1e-3;  // fine-tune gently; each half-step restarts Adam
    // At alpha = 0.3 the fitted class probabilities level off near 0.7-0.85,
    // so the full-scale threshold of 0.9 would select nothing at this scale.
    base.zeta = 0.97;
    return base;
}

void apply_config_json(ExperimentConfig& cfg, const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "source") cfg.source = value.get<std::string>();
            else if (key == "target") cfg.target = value.get<std::string>();
            else if (key == "beta") cfg.beta = value.get<double>();
            else if (key == "lambda") cfg.lambda = value.get<double>();
            else if (key == "zeta") cfg.zeta = value.get<double>();
            else if (key == "k") cfg.k = value.get<int>();
            else if (key == "iterations") cfg.iterations = value.get<int>();
            else if (key == "noise_ratio") cfg.noise_ratio = value.get<double>();
            else if (key == "lr") cfg.lr = value.get<double>();
            else if (key == "refine_lr") cfg.refine_lr = value.get<double>();
            else if (key == "weight_decay") cfg.weight_decay = value.get<double>();
            else if (key == "layers") cfg.layers = value.get<int>();
            else if (key == "hidden") cfg.hidden = value.get<int>();
            else if (key == "pretrain_epochs") cfg.pretrain_epochs = value.get<int>();
            else if (key == "refine_epochs") cfg.refine_epochs = value.get<int>();
            else if (key == "path_length") cfg.path_length = value.get<int>();
            else if (key == "batch_size") cfg.batch_size = value.get<int>();
            else if (key == "refine_mode") cfg.refine_mode = value.get<std::string>();
            else if (key == "seeds") cfg.seeds = value.get<std::vector<std::uint64_t>>();
            else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
            else if (key == "synthetic_source_size") cfg.synthetic_source_size = value.get<int>();
            else if (key == "synthetic_target_size") cfg.synthetic_target_size = value.get<int>();
            else if (key == "checkpoint_interval") cfg.checkpoint_interval = value.get<int>();
            else throw ConfigError("config: unknown key '" + key + "'");
        } catch (const json::exception&) {
            throw ConfigError("config: bad value for key '" + key + "'");
        }
    }
}

void validate(const ExperimentConfig& cfg) {
    std::vector<std::string> bad;
    auto check = [&](bool ok, const char* msg) {
        if (!ok) bad.push_back(msg);
    };
    check(cfg.beta >= 0.0, "beta must be >= 0");
    check(cfg.lambda >= 0.0, "lambda must be >= 0");
    check(cfg.zeta >= 0.0 && cfg.zeta <= 1.0, "zeta must be in [0,1]");
    check(cfg.noise_ratio >= 0.0 && cfg.noise_ratio <= 1.0, "noise_ratio must be in [0,1]");
    check(cfg.k >= 1, "k must be >= 1");
    check(cfg.iterations >= 0, "iterations must be >= 0");
    check(cfg.lr > 0.0, "lr must be > 0");
    check(cfg.refine_lr >= 0.0, "refine_lr must be >= 0");
    check(cfg.weight_decay >= 0.0, "weight_decay must be >= 0");
    check(cfg.layers >= 1, "layers must be >= 1");
    check(cfg.hidden >= 1, "hidden must be >= 1");
    check(cfg.pretrain_epochs >= 0, "pretrain_epochs must be >= 0");
    check(cfg.refine_epochs >= 0, "refine_epochs must be >= 0");
    check(cfg.path_length >= 1, "path_length must be >= 1");
    check(cfg.batch_size >= 0, "batch_size must be >= 0");
    check(cfg.refine_mode == "dual" || cfg.refine_mode == "self",
          "refine_mode must be 'dual' or 'self'");
    check(!cfg.seeds.empty(), "seeds must be non-empty");
    check(!cfg.out_dir.empty(), "out_dir must be non-empty");
    check(!cfg.source.empty() && !cfg.target.empty(), "source and target must be non-empty");
    check((cfg.source == "synthetic") == (cfg.target == "synthetic"),
          "source and target must both be dataset paths or both 'synthetic'");
    if (cfg.source == "synthetic") {
        check(cfg.synthetic_source_size >= 10, "synthetic_source_size must be >= 10");
        check(cfg.synthetic_target_size >= 10, "synthetic_target_size must be >= 10");
    }
    check(cfg.checkpoint_interval >= 0, "checkpoint_interval must be >= 0");
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "invalid config: ";
        for (size_t i = 0; i < bad.size(); ++i) msg << (i ? "; " : "") << bad[i];
        throw ConfigError(msg.str());
    }
}

ExperimentConfig load_config(const std::string& path, bool desk) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    ExperimentConfig cfg = desk ? desk_preset() : ExperimentConfig{};
    apply_config_json(cfg, j);
    validate(cfg);
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    return {{"source", cfg.source},
            {"target", cfg.target},
            {"beta", cfg.beta},
            {"lambda", cfg.lambda},
            {"zeta", cfg.zeta},
            {"k", cfg.k},
            {"iterations", cfg.iterations},
            {"noise_ratio", cfg.noise_ratio},
            {"lr", cfg.lr},
            {"refine_lr", cfg.refine_lr},
            {"weight_decay", cfg.weight_decay},
            {"layers", cfg.layers},
            {"hidden", cfg.hidden},
            {"pretrain_epochs", cfg.pretrain_epochs},
            {"refine_epochs", cfg.refine_epochs},
            {"path_length", cfg.path_length},
            {"batch_size", cfg.batch_size},
            {"refine_mode", cfg.refine_mode},
            {"seeds", cfg.seeds},
            {"out_dir", cfg.out_dir},
            {"synthetic_source_size", cfg.synthetic_source_size},
            {"synthetic_target_size", cfg.synthetic_target_size},
            {"checkpoint_interval", cfg.checkpoint_interval}};
}

}  // namespace negpr
