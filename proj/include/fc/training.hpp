#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fc/autodiff.hpp"
#include "fc/dataset.hpp"
#include "fc/mlp.hpp"
#include "fc/transformer.hpp"

namespace fc {

enum class ModelKind { Mlp, Attention };
enum class OptimizerKind { Sgd, AdamW };

struct TrainConfig {
    ModelKind model = ModelKind::Mlp;
    int p = 5;
    int k = 2;
    int m = 16;  ///< hidden units (mlp) or heads (attention)

    // attention-only geometry
    int embed_dim = 32;
    int head_dim = 8;
    int depth = 1;
    bool residual = true;

    std::int64_t steps = 1000;
    int batch = 0;  ///< 0 (or >= train size) means full batch
    double lr = 5e-3;
    double lambda = 0.0;  ///< strength of the norm regularizer
    OptimizerKind optimizer = OptimizerKind::AdamW;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-8;
    double weight_decay = 0.0;  ///< decoupled for AdamW, additive for SGD
    int warmup = 10;            ///< linear LR ramp over this many steps
    double split_fraction = 1.0;
    std::uint64_t seed = 0;
    std::int64_t eval_every = 100;
    bool track_margin = false;  ///< normalized margin each eval (O(p^k), mlp only)
};

/// One evaluation snapshot. val_acc is NaN when there is no validation split;
/// normalized_margin is NaN unless tracked (and for attention models).
struct TraceRow {
    std::int64_t step = 0;
    double train_loss = 0;
    double train_acc = 0;
    double val_acc = 0;
    double reg_term = 0;  ///< lambda * norm, the additive term in the objective
    double normalized_margin = 0;
};

struct TrainTrace {
    std::vector<TraceRow> rows;
};

/// A trained (or in-flight) model of either kind.
struct Model {
    ModelKind kind = ModelKind::Mlp;
    MlpParams mlp;
    AttnParams attn;

    int p() const { return kind == ModelKind::Mlp ? mlp.p : attn.cfg.p; }
    int k() const { return kind == ModelKind::Mlp ? mlp.k : attn.cfg.k; }
};

struct TrainResult {
    Model model;
    TrainTrace trace;
    ModAddDataset train_set;
    ModAddDataset val_set;
    bool diverged = false;
    std::int64_t diverged_step = -1;  ///< step of the first non-finite loss
};

/// Mean cross-entropy of the labels under the model's logits.
double mean_cross_entropy(const Model& model, const ModAddDataset& ds);

/// Fraction of rows whose argmax logit is the label; argmax ties break toward
/// the smaller class index.
double accuracy(const Model& model, const ModAddDataset& ds);

/// The model's norm as seen by the regularizer: L_{2,k+1} over hidden units
/// for the polynomial network, global L2 over parameter matrices for
/// attention.
double regularizer_norm(const Model& model);

/// Data loss + lambda * regularizer_norm at the current parameters.
double regularized_loss(const Model& model, const ModAddDataset& ds, double lambda);

/// Deterministic training run: the seed fixes the split, the init, and the
/// batch order, so identical configs produce bitwise-identical traces. If the
/// loss ever goes non-finite, training stops and the parameters roll back to
/// the last finite evaluation snapshot (diverged/diverged_step say where).
TrainResult train(const TrainConfig& cfg);

/// Canonical matrix view of the polynomial network: u_1..u_k as p x m (column
/// per unit), then w as m x p. Used by the trainer and the checkpoint format.
std::vector<Mat> pack_mlp(const MlpParams& net);
MlpParams unpack_mlp(const std::vector<Mat>& mats, int p, int k);

std::string trace_csv(const TrainTrace& trace);
void write_trace_csv(const TrainTrace& trace, const std::string& path);

struct GrokMetrics {
    std::int64_t step_train = -1;  ///< first eval step with train_acc >= threshold
    std::int64_t step_val = -1;    ///< first eval step with val_acc >= threshold
    std::int64_t delay = -1;       ///< step_val - step_train when both exist
};

/// -1 marks "threshold never reached" throughout.
GrokMetrics grokking_metrics(const TrainTrace& trace, double threshold);

}  // namespace fc
