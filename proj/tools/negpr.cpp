// Command-line front end: train / sweep / gradcheck / partition.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "negpr/config.hpp"
#include "negpr/experiment.hpp"
#include "negpr/gradcheck.hpp"
#include "negpr/graph.hpp"
#include "negpr/tudataset.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitGradcheck = 3;

struct TrainFlags {
    std::string config_path;
    bool desk = false;
    std::vector<std::uint64_t> seeds;
    std::optional<double> beta, lambda, zeta, alpha;
    std::optional<int> iterations;
    std::optional<std::string> refine_mode, out_dir, source, target;
};

// defaults -> desk preset -> config file -> command-line flags, validated last
negpr::ExperimentConfig resolve_config(const TrainFlags& f) {
    negpr::ExperimentConfig cfg;
    if (f.desk) cfg = negpr::desk_preset();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw negpr::ConfigError("cannot open config file: " + f.config_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw negpr::ConfigError(f.config_path + ": " + e.what());
        }
        negpr::apply_config_json(cfg, j);
    }
    if (!f.seeds.empty()) cfg.seeds = f.seeds;
    if (f.beta) cfg.beta = *f.beta;
    if (f.lambda) cfg.lambda = *f.lambda;
    if (f.zeta) cfg.zeta = *f.zeta;
    if (f.alpha) cfg.noise_ratio = *f.alpha;
    if (f.iterations) cfg.iterations = *f.iterations;
    if (f.refine_mode) cfg.refine_mode = *f.refine_mode;
    if (f.out_dir) cfg.out_dir = *f.out_dir;
    if (f.source) cfg.source = *f.source;
    if (f.target) cfg.target = *f.target;
    negpr::validate(cfg);
    return cfg;
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_flag("--desk", f.desk, "small-scale preset runnable on a laptop");
    cmd->add_option("--seed", f.seeds, "seed list override (repeatable)");
    cmd->add_option("--beta", f.beta, "consistency loss weight");
    cmd->add_option("--lambda", f.lambda, "agreement regularizer weight");
    cmd->add_option("--zeta", f.zeta, "pseudo-label confidence threshold");
    cmd->add_option("--alpha", f.alpha, "label noise ratio");
    cmd->add_option("--iterations", f.iterations, "refinement iterations");
    cmd->add_option("--refine-mode", f.refine_mode, "dual or self");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--source", f.source, "source dataset dir, or 'synthetic'");
    cmd->add_option("--target", f.target, "target dataset dir, or 'synthetic'");
}

int run_train(const TrainFlags& f) {
    const negpr::ExperimentConfig cfg = resolve_config(f);
    const negpr::RunSummary s = negpr::run_experiment(cfg);
    std::printf("train: %zu seed(s)  target acc %.4f +/- %.4f  source acc %.4f +/- %.4f  (%.1f s)\n",
                s.per_seed.size(), s.acc_target_mean, s.acc_target_std, s.acc_source_mean,
                s.acc_source_std, s.total_seconds);
    std::printf("summary: %s/summary.json\n", cfg.out_dir.c_str());
    return kExitOk;
}

int run_sweep_cmd(const TrainFlags& f, const std::string& param,
                  const std::string& values_csv) {
    const negpr::ExperimentConfig base = resolve_config(f);
    std::vector<double> values;
    std::stringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            values.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw negpr::ConfigError("bad sweep value: '" + tok + "'");
        }
    }
    if (values.empty()) throw negpr::ConfigError("--values must list at least one number");
    const negpr::SweepResult r = negpr::run_sweep(base, param, values);
    for (size_t i = 0; i < r.values.size(); ++i)
        std::printf("%s=%g  target acc %.4f +/- %.4f\n", param.c_str(), r.values[i],
                    r.summaries[i].acc_target_mean, r.summaries[i].acc_target_std);
    std::printf("sweep csv: %s\n", negpr::sweep_csv_path(base, param).c_str());
    return kExitOk;
}

int run_gradcheck_cmd(int trials, std::uint64_t seed, bool flip_sign) {
    negpr::GradcheckOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    opt.flip_tolerant_sign = flip_sign;
    const negpr::GradcheckReport report = negpr::run_gradcheck(opt);
    negpr::print_report(report, std::cout);
    return report.all_pass ? kExitOk : kExitGradcheck;
}

int run_partition(const std::string& data_dir, const std::string& metric_name, int parts,
                  const std::string& out_dir) {
    const negpr::DensityMetric metric = negpr::density_metric_from_string(metric_name);
    const negpr::DomainDataset ds = negpr::load_tudataset(data_dir, negpr::DomainTag::source);
    negpr::validate(ds);
    const std::vector<negpr::DomainDataset> part_list =
        negpr::partition_by_quantile(ds, metric, parts);
    for (const negpr::DomainDataset& part : part_list) {
        const std::filesystem::path dir = std::filesystem::path(out_dir) / part.name;
        std::filesystem::create_directories(dir);
        negpr::save_tudataset(part, dir.string());
        std::printf("%s: %zu graph(s)\n", dir.string().c_str(), part.graphs.size());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noise-resilient graph pretraining with cross-branch refinement"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    CLI::App* train = app.add_subcommand("train", "run a multi-seed experiment");
    add_train_flags(train, train_flags);

    TrainFlags sweep_flags;
    std::string sweep_param, sweep_values;
    CLI::App* sweep = app.add_subcommand("sweep", "run one experiment per parameter value");
    add_train_flags(sweep, sweep_flags);
    sweep->add_option("--param", sweep_param, "zeta or alpha")->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();

    int gc_trials = 100;
    std::uint64_t gc_seed = 7;
    bool gc_flip = false;
    CLI::App* gradcheck =
        app.add_subcommand("gradcheck", "validate analytic gradients against finite differences");
    gradcheck->add_option("--trials", gc_trials, "random instances per check");
    gradcheck->add_option("--seed", gc_seed, "rng seed");
    gradcheck->add_flag("--flip-tolerant-sign", gc_flip,
                        "negate the agreement-regularizer gradient (self-test hook)");

    std::string part_data, part_metric = "edge_density", part_out = "partitions";
    int part_count = 2;
    CLI::App* partition = app.add_subcommand("partition", "split a dataset by a density statistic");
    partition->add_option("--data", part_data, "dataset directory")->required();
    partition->add_option("--metric", part_metric, "edge_density, node_count, or flux");
    partition->add_option("--parts", part_count, "number of quantile buckets");
    partition->add_option("--out", part_out, "output root directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return run_train(train_flags);
        if (sweep->parsed()) return run_sweep_cmd(sweep_flags, sweep_param, sweep_values);
        if (gradcheck->parsed()) return run_gradcheck_cmd(gc_trials, gc_seed, gc_flip);
        if (partition->parsed()) return run_partition(part_data, part_metric, part_count, part_out);
    } catch (const negpr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const negpr::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
