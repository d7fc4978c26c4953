#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fc/autodiff.hpp"
#include "fc/dataset.hpp"

namespace fc {

/// Attention-only transformer for k-token addition: k value tokens followed by
/// an EQUALS token (id p); logits are read at the final position. No layer
/// norm, no MLP blocks — heads project straight back into the residual width.
struct AttnConfig {
    int p = 0;
    int k = 0;
    int heads = 4;       ///< m
    int embed_dim = 32;  ///< d
    int head_dim = 8;    ///< d_h
    int depth = 1;       ///< 1 or 2 attention layers
    bool residual = true;
    std::uint64_t seed = 0;
};

struct AttnLayer {
    std::vector<Mat> wk, wq, wv;  ///< per head, d x d_h
    Mat wp;                       ///< (heads * d_h) x d
};

struct AttnParams {
    AttnConfig cfg;
    Mat tok_embed;  ///< (p+1) x d, row p is the EQUALS token
    Mat pos_embed;  ///< (k+1) x d, learned positions
    std::vector<AttnLayer> layers;
    Mat unembed;  ///< d x p, untied from the embedding
};

std::size_t param_count(const AttnConfig& cfg);

/// All entries i.i.d. uniform on [-1/sqrt(d), 1/sqrt(d)], drawn from one
/// splitmix64-v1 stream in canonical parameter order — deterministic per seed.
AttnParams init_transformer(const AttnConfig& cfg);

/// Tape handles for every parameter matrix, in canonical order (tok_embed,
/// pos_embed, per layer wk/wq/wv per head then wp, unembed).
struct AttnRefs {
    Ref tok, pos;
    struct Layer {
        std::vector<Ref> wk, wq, wv;
        Ref wp;
    };
    std::vector<Layer> layers;
    Ref unembed;
    std::vector<Ref> all;
};
AttnRefs attn_leaves(Tape& tape, const AttnParams& params, bool needs_grad);

/// Batched forward pass: logits (batch x p) at the EQUALS position. Scores are
/// scaled by 1/sqrt(d_h) and soft-maxed over key positions; with residual on,
/// each layer adds its output back into the stream.
Ref transformer_logits(Tape& tape, const AttnRefs& refs, const AttnConfig& cfg,
                       const ModAddDataset& ds, std::span<const std::size_t> rows);

/// Convenience single-tuple forward (fresh tape, no gradients).
std::vector<double> forward_transformer(const AttnParams& params, std::span<const int> a);

/// Logits for many rows at once without gradients.
Mat transformer_batch_logits(const AttnParams& params, const ModAddDataset& ds,
                             std::span<const std::size_t> rows);

/// The bilinear attention form W^K W^Q^T of one head (d x d).
Mat attention_matrix(const AttnParams& params, int layer, int head);

/// Token-space view of one head: A(a, b) = e_a W^K W^Q^T e_b over the p value
/// tokens (positions and the EQUALS token excluded) — row a scores key token a
/// against query token b. For depth 2 this is the same linear diagnostic
/// evaluated with the layer's own weights.
Mat token_space_attention(const AttnParams& params, int layer, int head);

}  // namespace fc
