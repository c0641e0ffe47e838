#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "negpr/config.hpp"
#include "negpr/refinement.hpp"

namespace negpr {

struct SeedResult {
    std::uint64_t seed = 0;
    double acc_source = 0.0;  // final ensemble accuracy vs the noisy train labels
    double acc_target = 0.0;  // final ensemble accuracy vs the held-out labels
    int n_flipped = 0;
    std::string history_csv;
    std::string checkpoint_file;
    std::uint64_t checkpoint_hash = 0;
};

struct RunSummary {
    ExperimentConfig config;
    std::vector<SeedResult> per_seed;
    // population mean/std over the seeds
    double acc_target_mean = 0.0, acc_target_std = 0.0;
    double acc_source_mean = 0.0, acc_source_std = 0.0;
    double total_seconds = 0.0;
};

// One multi-seed experiment. Per seed: load or generate the datasets, inject
// label noise into the source, run the full pipeline, evaluate, and write
// history_seed<seed>.csv plus checkpoint_seed<seed>.json under cfg.out_dir.
// Finishes with summary.json. Everything except the timing fields is
// deterministic in (cfg, seeds).
RunSummary run_experiment(const ExperimentConfig& cfg);

// Fixed key set: schema_version, config, per_seed, aggregate, timing.
nlohmann::json summary_to_json(const RunSummary& s);
void write_summary(const RunSummary& s, const std::string& path);

struct SweepResult {
    std::string param;  // "zeta" or "alpha"
    std::vector<double> values;
    std::vector<RunSummary> summaries;
};

// One full multi-seed run per value, in out_dir/<param>_<value>/, plus
// sweep_<param>.csv (value, mean_acc, std_acc) in cfg.out_dir.
SweepResult run_sweep(const ExperimentConfig& base, const std::string& param,
                      const std::vector<double>& values);

std::string sweep_csv_path(const ExperimentConfig& base, const std::string& param);

}  // namespace negpr
