#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace negpr {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every experiment hyperparameter, loadable from a flat JSON file with keys
// named exactly like the fields. Defaults are the full-scale settings; the
// desk preset swaps in a minute-scale configuration.
struct ExperimentConfig {
    std::string source = "synthetic";  // dataset directory, or "synthetic"
    std::string target = "synthetic";
    double beta = 0.5;                 // weight of the semantic-consistency loss
    double lambda = 0.5;               // weight of the agreement regularizer
    double zeta = 0.9;                 // pseudo-label confidence threshold
    int k = 5;                         // neighbors per sample
    int iterations = 5;                // refinement iterations T
    double noise_ratio = 0.3;          // fraction of source labels corrupted
    double lr = 1e-4;
    double refine_lr = 0.0;            // fine-tuning rate; 0 = same as lr
    double weight_decay = 1e-12;
    int layers = 4;
    int hidden = 256;
    int pretrain_epochs = 100;
    int refine_epochs = 20;
    int path_length = 3;
    int batch_size = 0;                // 0 = full batch
    std::string refine_mode = "dual";  // "dual" (cross-teaching) or "self"
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out_dir = "runs";
    int synthetic_source_size = 400;
    int synthetic_target_size = 400;
    int checkpoint_interval = 0;       // in refinement steps; 0 = final only

    bool operator==(const ExperimentConfig&) const = default;
};

// Minute-scale settings on the synthetic task.
ExperimentConfig desk_preset(ExperimentConfig base = {});

// Applies flat JSON keys onto cfg. Unknown keys and wrong types raise
// ConfigError naming the offending key.
void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j);

// Throws ConfigError describing every violated range.
void validate(const ExperimentConfig& cfg);

// Reads + validates a config file on top of defaults (or the desk preset).
ExperimentConfig load_config(const std::string& path, bool desk = false);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace negpr
