#include "negpr/refinement.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "negpr/adam.hpp"
#include "negpr/prob.hpp"
#include "negpr/threads.hpp"
#include "negpr/tudataset.hpp"

namespace negpr {
namespace {

constexpr int kGradBlock = 64;  // fixed so reductions are thread-count invariant

double now_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

int argmax_row(const double* p, int n) {
    int best = 0;
    for (int c = 1; c < n; ++c)
        if (p[c] > p[best]) best = c;
    return best;
}

// Per-block gradient buffers reduced in block order: the result is identical
// for every worker count.
void accumulate_grads(const DomainDataset& ds, const std::vector<int>& idx,
                      const std::vector<PathData>* paths, const BranchParams& p,
                      const std::vector<ForwardCache>& caches, const Mat& dlogits,
                      std::vector<Mat>& grads) {
    const int n = static_cast<int>(idx.size());
    const int nb = num_blocks(n, kGradBlock);
    std::vector<std::vector<Mat>> partial(nb);
    parallel_blocks(n, kGradBlock, [&](int b, int lo, int hi) {
        partial[b] = zero_grads(p);
        for (int i = lo; i < hi; ++i) {
            const PathData* pd = paths ? &(*paths)[idx[i]] : nullptr;
            branch_backward(ds.graphs[idx[i]], pd, p, caches[i], dlogits.row_vec(i), partial[b]);
        }
    });
    for (int b = 0; b < nb; ++b)
        for (size_t m = 0; m < grads.size(); ++m)
            for (size_t t = 0; t < grads[m].a.size(); ++t) grads[m].a[t] += partial[b][m].a[t];
}

// Mean CE over the rows plus beta times the frozen-mixture consistency loss;
// the minibatch analogue of pretrain_loss (identical to it when the mixtures
// come from these same logits).
LossReport chunk_loss(const Mat& logits, const std::vector<int>& labels,
                      const std::vector<Vec>& mixtures, double beta) {
    const int n = logits.rows;
    LossReport rep;
    rep.grad_logits = Mat(n, logits.cols);
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
        const CrossEntropyResult ce = cross_entropy(softmax(logits.row_vec(i)), labels[i]);
        sup += ce.loss / n;
        for (int c = 0; c < logits.cols; ++c) rep.grad_logits(i, c) += ce.grad_logits[c] / n;
    }
    double noise = 0.0;
    if (beta != 0.0) {
        const NoiseLossResult nl = noise_loss_frozen(logits, mixtures);
        noise = nl.loss;
        for (size_t t = 0; t < rep.grad_logits.a.size(); ++t)
            rep.grad_logits.a[t] += beta * nl.grad_logits.a[t];
    }
    rep.components = {{"sup", sup}, {"noise", noise}, {"pseudo_ce", 0.0}, {"tolerant_reg", 0.0}};
    rep.total = sup + beta * noise;
    return rep;
}

// Adds the pseudo-label CE and agreement terms for the confident target
// samples to an existing report (mirrors the tail of refine_loss).
void append_target_terms(LossReport& rep, const Mat& target_logits, const PseudoLabelSet& pl,
                         double lambda) {
    const int T = pl.size();
    rep.grad_target_logits = Mat(T, target_logits.cols);
    if (T == 0) return;
    double pseudo_ce = 0.0, reg = 0.0;
    for (int j = 0; j < T; ++j) {
        const Vec p = softmax(target_logits.row_vec(j));
        pseudo_ce += cross_entropy(p, pl.labels[j]).loss / T;
        reg += tolerant_reg(p, pl.q[j]).loss / T;
        const Vec g = lemma1_gradient(p, pl.q[j], pl.labels[j], lambda);
        for (int c = 0; c < target_logits.cols; ++c) rep.grad_target_logits(j, c) = g[c] / T;
    }
    rep.components["pseudo_ce"] = pseudo_ce;
    rep.components["tolerant_reg"] = reg;
    rep.total += pseudo_ce + lambda * reg;
}

struct LoopSpec {
    const DomainDataset& source;
    const std::vector<PathData>& src_paths;
    const DomainDataset* target = nullptr;             // refinement only
    const std::vector<PathData>* tgt_paths = nullptr;  //
    const PseudoLabelSet* pl = nullptr;                //
    int epochs = 0;
};

// The shared optimization loop. Per epoch: forward the full source set,
// rebuild the neighbor graph from the current embeddings, freeze the mixture
// targets, then take one full-batch Adam step (or one per shuffled chunk
// when cfg.batch_size > 0). Records the last computed loss report.
void train_loop(BranchParams& student, const LoopSpec& spec, const ExperimentConfig& cfg,
                std::uint64_t seed, TrainRecord* record, AdamState* shared_opt = nullptr) {
    // A caller-owned optimizer keeps its moments across calls, so repeated
    // fine-tuning phases continue one optimization instead of restarting.
    AdamState local;
    AdamState& opt = shared_opt ? *shared_opt : local;
    opt.lr = spec.pl && cfg.refine_lr > 0.0 ? cfg.refine_lr : cfg.lr;
    opt.weight_decay = cfg.weight_decay;
    Rng shuffle_rng(derive_seed(seed, 0x5f));

    const std::vector<int> labels = spec.source.labels();
    const int n = spec.source.size();
    std::vector<int> all_idx(n);
    std::iota(all_idx.begin(), all_idx.end(), 0);
    std::vector<int> tgt_idx = spec.pl ? spec.pl->indices : std::vector<int>{};

    LossReport last;
    bool have_report = false;
    const int sweeps = std::max(spec.epochs, record ? 1 : 0);
    for (int epoch = 0; epoch < sweeps; ++epoch) {
        const bool update = epoch < spec.epochs;  // one extra pass only fills the record
        const bool full = cfg.batch_size == 0 || cfg.batch_size >= n;
        std::vector<ForwardCache> caches;
        BatchOutput out = batch_forward(spec.source, all_idx, &spec.src_paths, student,
                                        full ? &caches : nullptr);
        NeighborGraph ng;
        std::vector<Vec> mixtures;
        if (cfg.beta != 0.0) {
            ng = build_neighbor_graph(out.embeddings, cfg.k);
            if (!full) mixtures = neighbor_mixture(out.logits, ng);
        }

        auto target_logits = [&](std::vector<ForwardCache>* tc) {
            return batch_forward(*spec.target, tgt_idx, spec.tgt_paths, student, tc).logits;
        };

        if (full) {
            std::vector<ForwardCache> tcaches;
            LossReport rep;
            if (spec.pl) {
                const Mat tlogits = spec.pl->size() ? target_logits(&tcaches) : Mat(0, out.logits.cols);
                rep = refine_loss(out.logits, labels, ng, tlogits, *spec.pl, cfg.beta, cfg.lambda);
            } else {
                rep = pretrain_loss(out.logits, labels, ng, cfg.beta);
            }
            if (update) {
                std::vector<Mat> grads = zero_grads(student);
                accumulate_grads(spec.source, all_idx, &spec.src_paths, student, caches,
                                 rep.grad_logits, grads);
                if (spec.pl && spec.pl->size())
                    accumulate_grads(*spec.target, tgt_idx, spec.tgt_paths, student, tcaches,
                                     rep.grad_target_logits, grads);
                adam_step(opt, student.blocks, grads);
            }
            last = std::move(rep);
            have_report = true;
        } else if (!update) {
            // record-only pass: evaluate the objective on the full set
            LossReport rep = chunk_loss(out.logits, labels, mixtures, cfg.beta);
            if (spec.pl) {
                const Mat tlogits =
                    spec.pl->size() ? target_logits(nullptr) : Mat(0, out.logits.cols);
                append_target_terms(rep, tlogits, *spec.pl, cfg.lambda);
            }
            last = std::move(rep);
            have_report = true;
        } else {
            std::vector<int> order = all_idx;
            shuffle_rng.shuffle(order);
            for (int lo = 0; lo < n; lo += cfg.batch_size) {
                const int hi = std::min(n, lo + cfg.batch_size);
                const std::vector<int> chunk(order.begin() + lo, order.begin() + hi);
                std::vector<int> chunk_labels(chunk.size());
                std::vector<Vec> chunk_mix(cfg.beta != 0.0 ? chunk.size() : 0);
                for (size_t i = 0; i < chunk.size(); ++i) {
                    chunk_labels[i] = labels[chunk[i]];
                    if (cfg.beta != 0.0) chunk_mix[i] = mixtures[chunk[i]];
                }
                std::vector<ForwardCache> ccaches;
                BatchOutput cout =
                    batch_forward(spec.source, chunk, &spec.src_paths, student, &ccaches);
                LossReport rep = chunk_loss(cout.logits, chunk_labels, chunk_mix, cfg.beta);
                std::vector<ForwardCache> tcaches;
                if (spec.pl) {
                    const Mat tlogits =
                        spec.pl->size() ? target_logits(&tcaches) : Mat(0, cout.logits.cols);
                    append_target_terms(rep, tlogits, *spec.pl, cfg.lambda);
                }
                std::vector<Mat> grads = zero_grads(student);
                accumulate_grads(spec.source, chunk, &spec.src_paths, student, ccaches,
                                 rep.grad_logits, grads);
                if (spec.pl && spec.pl->size())
                    accumulate_grads(*spec.target, tgt_idx, spec.tgt_paths, student, tcaches,
                                     rep.grad_target_logits, grads);
                adam_step(opt, student.blocks, grads);
                last = std::move(rep);
                have_report = true;
            }
        }
    }
    if (record && have_report) {
        record->loss_total = last.total;
        record->loss_sup = last.components.at("sup");
        record->loss_noise = last.components.at("noise");
        record->loss_pseudo = last.components.at("pseudo_ce");
        record->loss_reg = last.components.at("tolerant_reg");
    }
}

}  // namespace

PseudoLabelSet filter_confident_probs(const Mat& probs, double zeta, BranchKind teacher) {
    if (zeta < 0.0) throw std::invalid_argument("filter: zeta must be >= 0");
    PseudoLabelSet pl;
    pl.teacher = teacher;
    for (int i = 0; i < probs.rows; ++i) {
        const double* row = probs.row(i);
        const int y = argmax_row(row, probs.cols);
        if (row[y] >= zeta) {
            pl.indices.push_back(i);
            pl.labels.push_back(y);
            pl.confidence.push_back(row[y]);
            pl.q.push_back(probs.row_vec(i));
        }
    }
    return pl;
}

PseudoLabelSet filter_confident(const BranchParams& teacher, const DomainDataset& target,
                                const std::vector<PathData>* paths, double zeta) {
    const BatchOutput out = batch_forward(target, paths, teacher);
    Mat probs(out.logits.rows, out.logits.cols);
    for (int i = 0; i < out.logits.rows; ++i) probs.set_row(i, softmax(out.logits.row_vec(i)));
    return filter_confident_probs(probs, zeta, teacher.cfg.kind);
}

BranchParams pretrain_branch(BranchParams branch, const DomainDataset& source,
                             const std::vector<PathData>& src_paths, const ExperimentConfig& cfg,
                             std::uint64_t seed, TrainRecord* record) {
    LoopSpec spec{source, src_paths};
    spec.epochs = cfg.pretrain_epochs;
    if (record) record->stage = "pretrain";
    train_loop(branch, spec, cfg, seed, record);
    return branch;
}

BranchParams refine_step(const BranchParams& teacher, BranchParams student,
                         const DomainDataset& source, const DomainDataset& target,
                         const std::vector<PathData>& src_paths,
                         const std::vector<PathData>& tgt_paths, const ExperimentConfig& cfg,
                         std::uint64_t seed, TrainRecord* record, AdamState* opt) {
    const bool teacher_eb = teacher.cfg.kind == BranchKind::eb;
    const PseudoLabelSet pl =
        filter_confident(teacher, target, teacher_eb ? &tgt_paths : nullptr, cfg.zeta);
    if (record) {
        record->stage = "refine";
        (teacher_eb ? record->n_conf_eb : record->n_conf_ib) = pl.size();
    }
    LoopSpec spec{source, src_paths, &target, &tgt_paths, &pl, cfg.refine_epochs};
    train_loop(student, spec, cfg, seed, record, opt);
    return student;
}

RunOutput run_negpr(const DomainDataset& source, const DomainDataset& target,
                    const ExperimentConfig& cfg, std::uint64_t seed, const ProgressFn& progress) {
    if (source.feature_dim() != target.feature_dim())
        throw std::invalid_argument("run: source/target feature dims differ");
    if (source.num_classes != target.num_classes)
        throw std::invalid_argument("run: source/target class counts differ");

    BranchConfig ibc{BranchKind::ib, source.feature_dim(), cfg.hidden,
                     cfg.layers,     source.num_classes,   cfg.path_length};
    BranchConfig ebc = ibc;
    ebc.kind = BranchKind::eb;
    Rng ib_rng(derive_seed(seed, 0x11));
    Rng eb_rng(derive_seed(seed, 0x12));

    RunOutput out;
    out.ib = init_branch(ibc, ib_rng);
    out.eb = init_branch(ebc, eb_rng);

    const std::vector<PathData> src_paths = build_all_path_data(source, cfg.path_length);
    const std::vector<PathData> tgt_paths = build_all_path_data(target, cfg.path_length);
    const std::vector<int> src_labels = source.labels();
    const std::vector<int> tgt_labels = target.labels();

    auto fill_accuracy = [&](TrainRecord& rec) {
        rec.acc_source = ensemble_accuracy(out.ib, out.eb, source, src_paths, src_labels);
        rec.acc_target = ensemble_accuracy(out.ib, out.eb, target, tgt_paths, tgt_labels);
    };

    int iter = 0;
    {
        TrainRecord rec_ib, rec_eb;
        double t0 = now_seconds();
        out.ib = pretrain_branch(std::move(out.ib), source, src_paths, cfg,
                                 derive_seed(seed, 0x21), &rec_ib);
        rec_ib.seconds = now_seconds() - t0;
        t0 = now_seconds();
        out.eb = pretrain_branch(std::move(out.eb), source, src_paths, cfg,
                                 derive_seed(seed, 0x22), &rec_eb);
        rec_eb.seconds = now_seconds() - t0;
        fill_accuracy(rec_ib);
        rec_eb.acc_source = rec_ib.acc_source;
        rec_eb.acc_target = rec_ib.acc_target;
        rec_ib.iter = iter++;
        rec_eb.iter = iter++;
        out.history.records.push_back(rec_ib);
        out.history.records.push_back(rec_eb);
    }

    const bool self_teach = cfg.refine_mode == "self";
    AdamState opt_ib, opt_eb;  // one continued fine-tuning run per branch
    int steps = 0;
    for (int round = 0; round < cfg.iterations; ++round) {
        for (int half = 0; half < 2; ++half) {
            // Cross-teaching: the implicit branch teaches first, then the
            // just-updated explicit branch teaches back. Self mode keeps the
            // same schedule but each branch filters through itself.
            const bool update_eb = half == 0;
            BranchParams& student = update_eb ? out.eb : out.ib;
            // Snapshot, not a reference: in self mode the student is its own
            // teacher and must filter through its pre-update state, which the
            // move below would otherwise gut.
            const BranchParams teacher =
                self_teach ? student : (update_eb ? out.ib : out.eb);
            TrainRecord rec;
            const double t0 = now_seconds();
            student = refine_step(teacher, std::move(student), source, target, src_paths,
                                  tgt_paths, cfg, derive_seed(seed, 0x300 + 2 * round + half),
                                  &rec, update_eb ? &opt_eb : &opt_ib);
            rec.seconds = now_seconds() - t0;
            fill_accuracy(rec);
            rec.iter = iter++;
            out.history.records.push_back(rec);
            ++steps;
            if (progress && cfg.checkpoint_interval > 0 && steps % cfg.checkpoint_interval == 0)
                progress(out, steps);
        }
    }
    return out;
}

Mat ensemble_probs(const BranchParams& ib, const BranchParams& eb, const DomainDataset& ds,
                   const std::vector<PathData>& paths) {
    const BatchOutput a = batch_forward(ds, nullptr, ib);
    const BatchOutput b = batch_forward(ds, &paths, eb);
    Mat probs(a.logits.rows, a.logits.cols);
    for (int i = 0; i < probs.rows; ++i) {
        const Vec pa = softmax(a.logits.row_vec(i));
        const Vec pb = softmax(b.logits.row_vec(i));
        for (int c = 0; c < probs.cols; ++c) probs(i, c) = 0.5 * (pa[c] + pb[c]);
    }
    return probs;
}

double ensemble_accuracy(const BranchParams& ib, const BranchParams& eb, const DomainDataset& ds,
                         const std::vector<PathData>& paths, const std::vector<int>& labels) {
    const Mat probs = ensemble_probs(ib, eb, ds, paths);
    int correct = 0, total = 0;
    for (int i = 0; i < probs.rows; ++i) {
        if (labels[i] < 0) continue;
        ++total;
        if (argmax_row(probs.row(i), probs.cols) == labels[i]) ++correct;
    }
    return total ? static_cast<double>(correct) / total : 0.0;
}

std::pair<int, Vec> predict(const BranchParams& ib, const BranchParams& eb,
                            const GraphInstance& g, const PathData* eb_paths) {
    PathData local;
    if (!eb_paths) {
        local = build_path_data(g, eb.cfg.path_length);
        eb_paths = &local;
    }
    const Vec pa = softmax(branch_forward(g, nullptr, ib).logits);
    const Vec pb = softmax(branch_forward(g, eb_paths, eb).logits);
    Vec mean(pa.size());
    for (size_t c = 0; c < mean.size(); ++c) mean[c] = 0.5 * (pa[c] + pb[c]);
    return {argmax_row(mean.data(), static_cast<int>(mean.size())), mean};
}

void write_history_csv(const RefinementHistory& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "stage,iter,loss_total,loss_sup,loss_noise,loss_pseudo,loss_reg,"
           "n_conf_ib,n_conf_eb,acc_source,acc_target,seconds\n";
    char buf[512];
    for (const TrainRecord& r : h.records) {
        std::snprintf(buf, sizeof buf,
                      "%s,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g\n",
                      r.stage.c_str(), r.iter, r.loss_total, r.loss_sup, r.loss_noise,
                      r.loss_pseudo, r.loss_reg, r.n_conf_ib, r.n_conf_eb, r.acc_source,
                      r.acc_target, r.seconds);
        out << buf;
    }
}

RefinementHistory read_history_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("history csv: empty file " + path);
    RefinementHistory h;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ss, tok, ',')) toks.push_back(tok);
        if (toks.size() != 12) throw DataError("history csv: bad row '" + line + "'");
        auto num = [&](int i) {
            double v = 0;
            auto [p, ec] = std::from_chars(toks[i].data(), toks[i].data() + toks[i].size(), v);
            if (ec != std::errc{} || p != toks[i].data() + toks[i].size())
                throw DataError("history csv: bad number '" + toks[i] + "'");
            return v;
        };
        TrainRecord r;
        r.stage = toks[0];
        r.iter = static_cast<int>(num(1));
        r.loss_total = num(2);
        r.loss_sup = num(3);
        r.loss_noise = num(4);
        r.loss_pseudo = num(5);
        r.loss_reg = num(6);
        r.n_conf_ib = static_cast<int>(num(7));
        r.n_conf_eb = static_cast<int>(num(8));
        r.acc_source = num(9);
        r.acc_target = num(10);
        r.seconds = num(11);
        h.records.push_back(std::move(r));
    }
    return h;
}

}  // namespace negpr
