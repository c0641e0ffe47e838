#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "negpr/adam.hpp"
#include "negpr/branch.hpp"
#include "negpr/config.hpp"
#include "negpr/losses.hpp"

namespace negpr {

// One completed training step: a branch pretraining phase or one refinement
// half-iteration. Accuracy columns are ensemble accuracies at record time;
// n_conf_* is the pseudo-label count filtered from that branch in this step
// (0 when it was not the teacher). `seconds` is wall time and is excluded
// from all determinism guarantees.
struct TrainRecord {
    std::string stage;  // "pretrain" or "refine"
    int iter = 0;       // monotone across the run
    double loss_total = 0.0;
    double loss_sup = 0.0;
    double loss_noise = 0.0;
    double loss_pseudo = 0.0;
    double loss_reg = 0.0;
    int n_conf_ib = 0;
    int n_conf_eb = 0;
    double acc_source = 0.0;
    double acc_target = 0.0;
    double seconds = 0.0;
};

struct RefinementHistory {
    std::vector<TrainRecord> records;
};

void write_history_csv(const RefinementHistory& h, const std::string& path);
RefinementHistory read_history_csv(const std::string& path);

// Selects the rows whose max probability is >= zeta; labels by argmax with
// exact ties going to the smaller class.
PseudoLabelSet filter_confident_probs(const Mat& probs, double zeta, BranchKind teacher);

// Runs the teacher over the whole target set and filters. `paths` is needed
// when the teacher is the explicit branch.
PseudoLabelSet filter_confident(const BranchParams& teacher, const DomainDataset& target,
                                const std::vector<PathData>* paths, double zeta);

// cfg.pretrain_epochs of Adam on the supervised + semantic-consistency
// objective over the (noisy) source. Fills `record` with the final-epoch
// losses when given.
BranchParams pretrain_branch(BranchParams branch, const DomainDataset& source,
                             const std::vector<PathData>& src_paths, const ExperimentConfig& cfg,
                             std::uint64_t seed, TrainRecord* record = nullptr);

// One refinement half-iteration: filter confident target samples through the
// teacher, then run cfg.refine_epochs of Adam on the fine-tuning objective,
// updating only the student. The teacher is never modified. Passing `opt`
// continues an optimizer across successive calls instead of restarting it.
BranchParams refine_step(const BranchParams& teacher, BranchParams student,
                         const DomainDataset& source, const DomainDataset& target,
                         const std::vector<PathData>& src_paths,
                         const std::vector<PathData>& tgt_paths, const ExperimentConfig& cfg,
                         std::uint64_t seed, TrainRecord* record = nullptr,
                         AdamState* opt = nullptr);

struct RunOutput {
    BranchParams ib;
    BranchParams eb;
    RefinementHistory history;
};

// Invoked with a snapshot after every cfg.checkpoint_interval refinement
// steps (when the interval is > 0); the int is the completed step count.
using ProgressFn = std::function<void(const RunOutput&, int)>;

// The full pipeline: pretrain both branches on the noisy source, then
// `iterations` rounds of cross-branch (or self-) teaching on the target.
// History holds one record per branch pretraining plus one per refinement
// half-iteration. Deterministic given (cfg, seed) up to the seconds fields.
RunOutput run_negpr(const DomainDataset& source, const DomainDataset& target,
                    const ExperimentConfig& cfg, std::uint64_t seed,
                    const ProgressFn& progress = nullptr);

// Mean of the two branches' softmax outputs, one row per graph.
Mat ensemble_probs(const BranchParams& ib, const BranchParams& eb, const DomainDataset& ds,
                   const std::vector<PathData>& paths);

// Fraction of labeled graphs whose ensemble argmax (ties to the smaller
// class) matches `labels`.
double ensemble_accuracy(const BranchParams& ib, const BranchParams& eb, const DomainDataset& ds,
                         const std::vector<PathData>& paths, const std::vector<int>& labels);

// Prediction for a single graph; computes path data on the fly when not
// supplied.
std::pair<int, Vec> predict(const BranchParams& ib, const BranchParams& eb,
                            const GraphInstance& g, const PathData* eb_paths = nullptr);

}  // namespace negpr
