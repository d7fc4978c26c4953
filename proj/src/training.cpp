#include "fc/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fc/prng.hpp"

namespace fc {

namespace {

constexpr std::uint64_t kSplitStream = 0x517u;
constexpr std::uint64_t kInitStream = 0x1417u;
constexpr std::uint64_t kBatchStream = 0xba7c4u;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

int argmax_small_tie(const double* row, int n) {
    int best = 0;
    for (int j = 1; j < n; ++j)
        if (row[j] > row[best]) best = j;  // strict: ties keep the smaller index
    return best;
}

/// Logits for a whole dataset, chunked to keep tape memory bounded.
Mat model_logits(const Model& model, const ModAddDataset& ds) {
    const int p = model.p();
    Mat logits(static_cast<int>(ds.size()), p);
    if (model.kind == ModelKind::Mlp) {
        std::vector<int> a(static_cast<std::size_t>(ds.k));
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto r = ds.row(i);
            for (int j = 0; j < ds.k; ++j) a[static_cast<std::size_t>(j)] = r[static_cast<std::size_t>(j)];
            const std::vector<double> f = forward_mlp(model.mlp, a);
            for (int c = 0; c < p; ++c) logits.at(static_cast<int>(i), c) = f[static_cast<std::size_t>(c)];
        }
        return logits;
    }
    constexpr std::size_t kChunk = 1024;
    std::vector<std::size_t> rows;
    for (std::size_t start = 0; start < ds.size(); start += kChunk) {
        const std::size_t stop = std::min(ds.size(), start + kChunk);
        rows.resize(stop - start);
        std::iota(rows.begin(), rows.end(), start);
        const Mat chunk = transformer_batch_logits(model.attn, ds, rows);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (int c = 0; c < p; ++c)
                logits.at(static_cast<int>(start + i), c) = chunk.at(static_cast<int>(i), c);
    }
    return logits;
}

double cross_entropy_of_logits(const Mat& logits, const std::vector<std::int32_t>& labels) {
    double nll = 0.0;
    for (int i = 0; i < logits.rows; ++i) {
        double mx = logits.at(i, 0);
        for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, logits.at(i, j));
        double z = 0.0;
        for (int j = 0; j < logits.cols; ++j) z += std::exp(logits.at(i, j) - mx);
        nll -= logits.at(i, labels[static_cast<std::size_t>(i)]) - (mx + std::log(z));
    }
    return nll / logits.rows;
}

void append_g17(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

double mean_cross_entropy(const Model& model, const ModAddDataset& ds) {
    if (ds.size() == 0) throw std::invalid_argument("mean_cross_entropy: empty dataset");
    return cross_entropy_of_logits(model_logits(model, ds), ds.labels);
}

double accuracy(const Model& model, const ModAddDataset& ds) {
    if (ds.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
    const Mat logits = model_logits(model, ds);
    std::size_t hits = 0;
    for (int i = 0; i < logits.rows; ++i)
        if (argmax_small_tie(&logits.a[static_cast<std::size_t>(i) * logits.cols], logits.cols) ==
            ds.labels[static_cast<std::size_t>(i)])
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

double regularizer_norm(const Model& model) {
    if (model.kind == ModelKind::Mlp) return l2k1_norm(model.mlp);
    double sq = 0.0;
    auto acc = [&sq](const Mat& m) {
        for (const double v : m.a) sq += v * v;
    };
    acc(model.attn.tok_embed);
    acc(model.attn.pos_embed);
    for (const AttnLayer& layer : model.attn.layers) {
        for (const Mat& m : layer.wk) acc(m);
        for (const Mat& m : layer.wq) acc(m);
        for (const Mat& m : layer.wv) acc(m);
        acc(layer.wp);
    }
    acc(model.attn.unembed);
    return std::sqrt(sq);
}

double regularized_loss(const Model& model, const ModAddDataset& ds, double lambda) {
    return mean_cross_entropy(model, ds) + lambda * regularizer_norm(model);
}

std::vector<Mat> pack_mlp(const MlpParams& net) {
    const int p = net.p;
    const int k = net.k;
    const int m = net.m();
    std::vector<Mat> mats;
    mats.reserve(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j < k; ++j) {
        Mat u(p, m);
        for (int i = 0; i < m; ++i)
            for (int a = 0; a < p; ++a)
                u.at(a, i) = net.neurons[static_cast<std::size_t>(i)].u[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)];
        mats.push_back(std::move(u));
    }
    Mat w(m, p);
    for (int i = 0; i < m; ++i)
        for (int c = 0; c < p; ++c)
            w.at(i, c) = net.neurons[static_cast<std::size_t>(i)].w[static_cast<std::size_t>(c)];
    mats.push_back(std::move(w));
    return mats;
}

MlpParams unpack_mlp(const std::vector<Mat>& mats, int p, int k) {
    if (mats.size() != static_cast<std::size_t>(k) + 1)
        throw std::invalid_argument("unpack_mlp: expected k+1 matrices");
    const Mat& w = mats.back();
    const int m = w.rows;
    for (int j = 0; j < k; ++j)
        if (mats[static_cast<std::size_t>(j)].rows != p || mats[static_cast<std::size_t>(j)].cols != m)
            throw std::invalid_argument("unpack_mlp: embedding matrix shape mismatch");
    if (w.cols != p) throw std::invalid_argument("unpack_mlp: output matrix shape mismatch");

    MlpParams net;
    net.p = p;
    net.k = k;
    net.neurons.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        NeuronParams& n = net.neurons[static_cast<std::size_t>(i)];
        n.u.resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            auto& uj = n.u[static_cast<std::size_t>(j)];
            uj.resize(static_cast<std::size_t>(p));
            for (int a = 0; a < p; ++a) uj[static_cast<std::size_t>(a)] = mats[static_cast<std::size_t>(j)].at(a, i);
        }
        n.w.resize(static_cast<std::size_t>(p));
        for (int c = 0; c < p; ++c) n.w[static_cast<std::size_t>(c)] = w.at(i, c);
    }
    return net;
}

namespace {

/// Everything the step loop needs to know about a model family.
struct Adapter {
    std::vector<Mat> params;
    ModelKind kind;
    AttnConfig attn_cfg;  // attention only
    int p = 0, k = 0;

    Model to_model() const {
        Model model;
        model.kind = kind;
        if (kind == ModelKind::Mlp) {
            model.mlp = unpack_mlp(params, p, k);
        } else {
            model.attn.cfg = attn_cfg;
            std::size_t at = 0;
            model.attn.tok_embed = params[at++];
            model.attn.pos_embed = params[at++];
            model.attn.layers.resize(static_cast<std::size_t>(attn_cfg.depth));
            for (AttnLayer& layer : model.attn.layers) {
                for (int h = 0; h < attn_cfg.heads; ++h) layer.wk.push_back(params[at++]);
                for (int h = 0; h < attn_cfg.heads; ++h) layer.wq.push_back(params[at++]);
                for (int h = 0; h < attn_cfg.heads; ++h) layer.wv.push_back(params[at++]);
                layer.wp = params[at++];
            }
            model.attn.unembed = params[at++];
        }
        return model;
    }
};

Adapter make_adapter(const TrainConfig& cfg) {
    Adapter a;
    a.p = cfg.p;
    a.k = cfg.k;
    a.kind = cfg.model;
    if (cfg.model == ModelKind::Mlp) {
        if (cfg.m < 1) throw std::invalid_argument("train: need at least one hidden unit");
        // Uniform +-1/sqrt(p) init, drawn in canonical matrix order.
        SplitMix64 rng = SplitMix64(cfg.seed).fork(kInitStream);
        const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.p));
        for (int j = 0; j < cfg.k; ++j) {
            Mat u(cfg.p, cfg.m);
            for (double& v : u.a) v = rng.uniform(-bound, bound);
            a.params.push_back(std::move(u));
        }
        Mat w(cfg.m, cfg.p);
        for (double& v : w.a) v = rng.uniform(-bound, bound);
        a.params.push_back(std::move(w));
    } else {
        AttnConfig ac;
        ac.p = cfg.p;
        ac.k = cfg.k;
        ac.heads = cfg.m;
        ac.embed_dim = cfg.embed_dim;
        ac.head_dim = cfg.head_dim;
        ac.depth = cfg.depth;
        ac.residual = cfg.residual;
        ac.seed = SplitMix64(cfg.seed).fork(kInitStream).next();
        a.attn_cfg = ac;
        const AttnParams init = init_transformer(ac);
        a.params.push_back(init.tok_embed);
        a.params.push_back(init.pos_embed);
        for (const AttnLayer& layer : init.layers) {
            for (const Mat& m : layer.wk) a.params.push_back(m);
            for (const Mat& m : layer.wq) a.params.push_back(m);
            for (const Mat& m : layer.wv) a.params.push_back(m);
            a.params.push_back(layer.wp);
        }
        a.params.push_back(init.unembed);
    }
    return a;
}

/// Build the regularized batch loss on the tape; returns (loss, leaf refs).
std::pair<Ref, std::vector<Ref>> batch_loss(Tape& tape, const Adapter& adapter,
                                            const TrainConfig& cfg, const ModAddDataset& ds,
                                            std::span<const std::size_t> rows) {
    std::vector<Ref> leaves;
    leaves.reserve(adapter.params.size());
    for (const Mat& m : adapter.params) leaves.push_back(tape.leaf(m, /*needs_grad=*/true));

    Ref logits;
    if (adapter.kind == ModelKind::Mlp) {
        std::vector<int> col(rows.size());
        Ref summed;
        for (int j = 0; j < cfg.k; ++j) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                col[i] = ds.row(rows[i])[static_cast<std::size_t>(j)];
            const Ref g = tape.gather_rows(leaves[static_cast<std::size_t>(j)], col);
            summed = (j == 0) ? g : tape.add(summed, g);
        }
        logits = tape.matmul(tape.integer_power(summed, cfg.k), leaves.back());
    } else {
        AttnRefs refs;
        std::size_t at = 0;
        refs.tok = leaves[at++];
        refs.pos = leaves[at++];
        refs.all = {refs.tok, refs.pos};
        refs.layers.resize(static_cast<std::size_t>(adapter.attn_cfg.depth));
        for (AttnRefs::Layer& lr : refs.layers) {
            for (int h = 0; h < adapter.attn_cfg.heads; ++h) lr.wk.push_back(leaves[at++]);
            for (int h = 0; h < adapter.attn_cfg.heads; ++h) lr.wq.push_back(leaves[at++]);
            for (int h = 0; h < adapter.attn_cfg.heads; ++h) lr.wv.push_back(leaves[at++]);
            lr.wp = leaves[at++];
        }
        refs.unembed = leaves[at++];
        logits = transformer_logits(tape, refs, adapter.attn_cfg, ds, rows);
    }

    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        labels[i] = ds.labels[rows[i]];
    Ref loss = tape.cross_entropy(logits, std::move(labels));

    if (cfg.lambda != 0.0) {
        Ref reg;
        if (adapter.kind == ModelKind::Mlp) {
            const std::span<const Ref> us(leaves.data(), static_cast<std::size_t>(cfg.k));
            reg = tape.group_norm_mlp(us, leaves.back(), cfg.k + 1);
        } else {
            reg = tape.global_l2(leaves);
        }
        loss = tape.add(loss, tape.scale(reg, cfg.lambda));
    }
    return {loss, std::move(leaves)};
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
    if (cfg.steps < 0) throw std::invalid_argument("train: steps must be >= 0");
    if (cfg.eval_every < 1) throw std::invalid_argument("train: eval_every must be >= 1");
    if (!(cfg.lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
    if (cfg.warmup < 0) throw std::invalid_argument("train: warmup must be >= 0");
    if (cfg.batch < 0) throw std::invalid_argument("train: batch must be >= 0");
    if (cfg.lambda < 0.0) throw std::invalid_argument("train: lambda must be >= 0");
    if (cfg.track_margin && cfg.model != ModelKind::Mlp)
        throw std::invalid_argument("train: margin tracking is defined for the mlp model only");

    const ModAddDataset full = generate_full(cfg.p, cfg.k);
    SplitSpec split_spec;
    split_spec.train_fraction = cfg.split_fraction;
    split_spec.seed = SplitMix64(cfg.seed).fork(kSplitStream).next();
    auto [train_set, val_set] = split(full, split_spec);
    if (train_set.size() == 0) throw std::invalid_argument("train: split produced an empty train set");
    const bool has_val = val_set.size() > 0;

    Adapter adapter = make_adapter(cfg);

    // Optimizer state.
    std::vector<Mat> mom, vel;
    if (cfg.optimizer == OptimizerKind::AdamW) {
        for (const Mat& m : adapter.params) {
            mom.emplace_back(m.rows, m.cols, 0.0);
            vel.emplace_back(m.rows, m.cols, 0.0);
        }
    }

    // Batch scheduling.
    const std::size_t n_train = train_set.size();
    const bool full_batch = cfg.batch == 0 || static_cast<std::size_t>(cfg.batch) >= n_train;
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 batch_rng = SplitMix64(cfg.seed).fork(kBatchStream);
    std::size_t cursor = n_train;  // forces a shuffle before the first mini-batch

    TrainResult result;
    std::vector<Mat> snapshot = adapter.params;

    auto evaluate = [&](std::int64_t step) -> bool {
        const Model model = adapter.to_model();
        TraceRow row;
        row.step = step;
        row.train_loss = mean_cross_entropy(model, train_set);
        if (!std::isfinite(row.train_loss)) {
            result.diverged = true;
            result.diverged_step = step;
            return false;
        }
        row.train_acc = accuracy(model, train_set);
        row.val_acc = has_val ? accuracy(model, val_set) : kNan;
        row.reg_term = cfg.lambda * regularizer_norm(model);
        row.normalized_margin =
            cfg.track_margin ? dataset_margin_h(model.mlp, full).normalized_margin : kNan;
        result.trace.rows.push_back(row);
        snapshot = adapter.params;
        return true;
    };

    std::vector<std::size_t> batch_rows;
    Tape tape;
    for (std::int64_t step = 0;; ++step) {
        if (step % cfg.eval_every == 0 || step == cfg.steps)
            if (!evaluate(step)) break;
        if (step == cfg.steps) break;

        // Assemble the batch for this step.
        if (full_batch) {
            batch_rows = order;
        } else {
            batch_rows.clear();
            while (batch_rows.size() < static_cast<std::size_t>(cfg.batch)) {
                if (cursor == n_train) {
                    batch_rng.shuffle(std::span<std::size_t>(order));
                    cursor = 0;
                }
                batch_rows.push_back(order[cursor++]);
            }
        }

        tape.clear();
        auto [loss, leaves] = batch_loss(tape, adapter, cfg, train_set, batch_rows);
        if (!std::isfinite(tape.scalar_value(loss))) {
            result.diverged = true;
            result.diverged_step = step;
            break;
        }
        tape.backward(loss);

        const double lr_t =
            cfg.warmup > 0
                ? cfg.lr * std::min(1.0, static_cast<double>(step + 1) / cfg.warmup)
                : cfg.lr;
        if (cfg.optimizer == OptimizerKind::Sgd) {
            for (std::size_t t = 0; t < adapter.params.size(); ++t) {
                const Mat& g = tape.grad(leaves[t]);
                Mat& th = adapter.params[t];
                for (std::size_t i = 0; i < th.size(); ++i)
                    th.a[i] -= lr_t * (g.a[i] + cfg.weight_decay * th.a[i]);
            }
        } else {
            const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step) + 1.0);
            const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step) + 1.0);
            for (std::size_t t = 0; t < adapter.params.size(); ++t) {
                const Mat& g = tape.grad(leaves[t]);
                Mat& th = adapter.params[t];
                Mat& m1 = mom[t];
                Mat& m2 = vel[t];
                for (std::size_t i = 0; i < th.size(); ++i) {
                    m1.a[i] = cfg.beta1 * m1.a[i] + (1.0 - cfg.beta1) * g.a[i];
                    m2.a[i] = cfg.beta2 * m2.a[i] + (1.0 - cfg.beta2) * g.a[i] * g.a[i];
                    const double mhat = m1.a[i] / bc1;
                    const double vhat = m2.a[i] / bc2;
                    // Decoupled weight decay: the shrink never touches the moments.
                    th.a[i] -= lr_t * (mhat / (std::sqrt(vhat) + cfg.eps) +
                                       cfg.weight_decay * th.a[i]);
                }
            }
        }
    }

    if (result.diverged) adapter.params = snapshot;  // last finite evaluation point
    result.model = adapter.to_model();
    result.train_set = std::move(train_set);
    result.val_set = std::move(val_set);
    return result;
}

std::string trace_csv(const TrainTrace& trace) {
    std::string out = "step,train_loss,train_acc,val_acc,reg_term,normalized_margin\n";
    for (const TraceRow& row : trace.rows) {
        out += std::to_string(row.step);
        out += ',';
        append_g17(out, row.train_loss);
        out += ',';
        append_g17(out, row.train_acc);
        out += ',';
        if (std::isfinite(row.val_acc)) append_g17(out, row.val_acc);
        out += ',';
        append_g17(out, row.reg_term);
        out += ',';
        if (std::isfinite(row.normalized_margin)) append_g17(out, row.normalized_margin);
        out += '\n';
    }
    return out;
}

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << trace_csv(trace);
    if (!f) throw std::runtime_error("write failed: " + path);
}

GrokMetrics grokking_metrics(const TrainTrace& trace, double threshold) {
    GrokMetrics metrics;
    for (const TraceRow& row : trace.rows) {
        if (metrics.step_train < 0 && row.train_acc >= threshold) metrics.step_train = row.step;
        if (metrics.step_val < 0 && std::isfinite(row.val_acc) && row.val_acc >= threshold)
            metrics.step_val = row.step;
    }
    if (metrics.step_train >= 0 && metrics.step_val >= 0)
        metrics.delay = metrics.step_val - metrics.step_train;
    return metrics;
}

}  // namespace fc
