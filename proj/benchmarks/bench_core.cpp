// Microbenchmarks for the hot paths: per-graph forwards, path extraction,
// neighbor graph construction, and one full pretraining epoch.

#include <benchmark/benchmark.h>

#include <utility>

#include "negpr/branch.hpp"
#include "negpr/config.hpp"
#include "negpr/losses.hpp"
#include "negpr/noise.hpp"
#include "negpr/paths.hpp"
#include "negpr/refinement.hpp"
#include "negpr/rng.hpp"
#include "negpr/synthetic.hpp"

using namespace negpr;

namespace {

const std::pair<DomainDataset, DomainDataset>& data() {
    static const auto p = synth_two_domain(120, 120, 7);
    return p;
}

BranchParams make_branch(BranchKind kind, int feature_dim) {
    BranchConfig bc;
    bc.kind = kind;
    bc.feature_dim = feature_dim;
    bc.hidden = 32;
    bc.layers = 2;
    Rng rng(1);
    return init_branch(bc, rng);
}

const std::vector<PathData>& target_paths() {
    static const std::vector<PathData> p = build_all_path_data(data().second, 3);
    return p;
}

}  // namespace

static void BM_implicit_forward(benchmark::State& state) {
    const DomainDataset& ds = data().second;
    const BranchParams p = make_branch(BranchKind::ib, ds.feature_dim());
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(branch_forward(ds.graphs[i % ds.size()], nullptr, p));
        ++i;
    }
}
BENCHMARK(BM_implicit_forward);

static void BM_explicit_forward(benchmark::State& state) {
    const DomainDataset& ds = data().second;
    const std::vector<PathData>& paths = target_paths();
    const BranchParams p = make_branch(BranchKind::eb, ds.feature_dim());
    size_t i = 0;
    for (auto _ : state) {
        const size_t j = i % ds.size();
        benchmark::DoNotOptimize(branch_forward(ds.graphs[j], &paths[j], p));
        ++i;
    }
}
BENCHMARK(BM_explicit_forward);

static void BM_path_extraction(benchmark::State& state) {
    const DomainDataset& ds = data().second;
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_path_data(ds.graphs[i % ds.size()], 3));
        ++i;
    }
}
BENCHMARK(BM_path_extraction);

static void BM_neighbor_graph(benchmark::State& state) {
    Rng rng(3);
    Mat emb(200, 32);
    for (double& x : emb.a) x = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(build_neighbor_graph(emb, 5));
}
BENCHMARK(BM_neighbor_graph);

static void BM_pretrain_epoch(benchmark::State& state) {
    auto [src, tgt] = synth_two_domain(60, 10, 7);
    inject_label_noise(src, 0.3, 9);
    const std::vector<PathData> src_paths = build_all_path_data(src, 3);
    ExperimentConfig cfg;
    cfg.hidden = 32;
    cfg.layers = 2;
    cfg.pretrain_epochs = 1;
    cfg.lr = 1e-2;
    const BranchParams p = make_branch(BranchKind::ib, src.feature_dim());
    for (auto _ : state)
        benchmark::DoNotOptimize(pretrain_branch(p, src, src_paths, cfg, 11));
}
BENCHMARK(BM_pretrain_epoch);

BENCHMARK_MAIN();
