#include "negpr/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "negpr/checkpoint.hpp"
#include "negpr/noise.hpp"
#include "negpr/rng.hpp"
#include "negpr/synthetic.hpp"
#include "negpr/tudataset.hpp"

namespace fs = std::filesystem;

namespace negpr {
namespace {

using nlohmann::json;

constexpr std::uint64_t kDataStream = 0xda7a;
constexpr std::uint64_t kNoiseStream = 0x5e15e;

double wall_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void mean_std(const std::vector<double>& xs, double& mean, double& std) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    std = std::sqrt(var / xs.size());
}

std::string fmt_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    fs::create_directories(cfg.out_dir);
    const double t_start = wall_seconds();

    const bool synthetic = cfg.source == "synthetic";
    DomainDataset loaded_source, loaded_target;
    if (!synthetic) {
        loaded_source = load_tudataset(cfg.source, DomainTag::source);
        loaded_target = load_tudataset(cfg.target, DomainTag::target);
        try {
            negpr::validate(loaded_source);
            negpr::validate(loaded_target);
        } catch (const std::invalid_argument& e) {
            throw DataError(std::string("dataset invalid: ") + e.what());
        }
    }

    RunSummary summary;
    summary.config = cfg;
    for (const std::uint64_t seed : cfg.seeds) {
        DomainDataset source, target;
        if (synthetic) {
            auto pair = synth_two_domain(cfg.synthetic_source_size, cfg.synthetic_target_size,
                                         derive_seed(seed, kDataStream));
            source = std::move(pair.first);
            target = std::move(pair.second);
        } else {
            source = loaded_source;
            target = loaded_target;
        }
        const NoiseRecord noise =
            inject_label_noise(source, cfg.noise_ratio, derive_seed(seed, kNoiseStream));

        SeedResult sr;
        sr.seed = seed;
        sr.n_flipped = noise.num_flipped();
        sr.history_csv = "history_seed" + std::to_string(seed) + ".csv";
        sr.checkpoint_file = "checkpoint_seed" + std::to_string(seed) + ".json";
        const std::string history_path = (fs::path(cfg.out_dir) / sr.history_csv).string();
        const std::string ck_path = (fs::path(cfg.out_dir) / sr.checkpoint_file).string();

        ProgressFn progress;
        if (cfg.checkpoint_interval > 0)
            progress = [&](const RunOutput& snap, int) {
                save_checkpoint({1, snap.ib, snap.eb}, ck_path);
                write_history_csv(snap.history, history_path);
            };

        const RunOutput out = run_negpr(source, target, cfg, seed, progress);

        const auto tgt_paths = build_all_path_data(target, cfg.path_length);
        const auto src_paths = build_all_path_data(source, cfg.path_length);
        sr.acc_source = ensemble_accuracy(out.ib, out.eb, source, src_paths, source.labels());
        sr.acc_target = ensemble_accuracy(out.ib, out.eb, target, tgt_paths, target.labels());

        write_history_csv(out.history, history_path);
        save_checkpoint({1, out.ib, out.eb}, ck_path);
        sr.checkpoint_hash = fnv1a_file(ck_path);
        summary.per_seed.push_back(std::move(sr));
    }

    std::vector<double> accs_t, accs_s;
    for (const SeedResult& sr : summary.per_seed) {
        accs_t.push_back(sr.acc_target);
        accs_s.push_back(sr.acc_source);
    }
    mean_std(accs_t, summary.acc_target_mean, summary.acc_target_std);
    mean_std(accs_s, summary.acc_source_mean, summary.acc_source_std);
    summary.total_seconds = wall_seconds() - t_start;

    write_summary(summary, (fs::path(cfg.out_dir) / "summary.json").string());
    return summary;
}

json summary_to_json(const RunSummary& s) {
    json per_seed = json::array();
    for (const SeedResult& sr : s.per_seed)
        per_seed.push_back({{"seed", sr.seed},
                            {"acc_source", sr.acc_source},
                            {"acc_target", sr.acc_target},
                            {"n_flipped", sr.n_flipped},
                            {"history_csv", sr.history_csv},
                            {"checkpoint", sr.checkpoint_file},
                            {"checkpoint_hash", sr.checkpoint_hash}});
    return {{"schema_version", 1},
            {"config", config_to_json(s.config)},
            {"per_seed", per_seed},
            {"aggregate",
             {{"acc_target_mean", s.acc_target_mean},
              {"acc_target_std", s.acc_target_std},
              {"acc_source_mean", s.acc_source_mean},
              {"acc_source_std", s.acc_source_std}}},
            {"timing", {{"total_seconds", s.total_seconds}}}};
}

void write_summary(const RunSummary& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << summary_to_json(s).dump(1) << "\n";
}

std::string sweep_csv_path(const ExperimentConfig& base, const std::string& param) {
    return (fs::path(base.out_dir) / ("sweep_" + param + ".csv")).string();
}

SweepResult run_sweep(const ExperimentConfig& base, const std::string& param,
                      const std::vector<double>& values) {
    if (param != "zeta" && param != "alpha")
        throw ConfigError("sweep: param must be 'zeta' or 'alpha'");
    if (values.empty()) throw ConfigError("sweep: values must be non-empty");
    validate(base);
    fs::create_directories(base.out_dir);

    SweepResult result;
    result.param = param;
    result.values = values;
    for (const double v : values) {
        ExperimentConfig cfg = base;
        if (param == "zeta")
            cfg.zeta = v;
        else
            cfg.noise_ratio = v;
        cfg.out_dir = (fs::path(base.out_dir) / (param + "_" + fmt_value(v))).string();
        validate(cfg);
        result.summaries.push_back(run_experiment(cfg));
    }

    std::ofstream csv(sweep_csv_path(base, param));
    if (!csv) throw DataError("cannot write sweep csv");
    csv << "value,mean_acc,std_acc\n";
    char buf[128];
    for (size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", values[i],
                      result.summaries[i].acc_target_mean, result.summaries[i].acc_target_std);
        csv << buf;
    }
    return result;
}

}  // namespace negpr
