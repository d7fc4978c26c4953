#include "fc/transformer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fc/prng.hpp"

namespace fc {

namespace {

void validate_cfg(const AttnConfig& cfg) {
    if (cfg.p < 3 || !is_prime(cfg.p)) throw std::invalid_argument("AttnConfig: p must be an odd prime");
    if (cfg.k < 2 || cfg.k > 6) throw std::invalid_argument("AttnConfig: k must be in [2, 6]");
    if (cfg.heads < 1) throw std::invalid_argument("AttnConfig: need at least one head");
    if (cfg.embed_dim < 1 || cfg.head_dim < 1)
        throw std::invalid_argument("AttnConfig: dimensions must be positive");
    if (cfg.depth != 1 && cfg.depth != 2)
        throw std::invalid_argument("AttnConfig: depth must be 1 or 2");
}

void fill_uniform(Mat& m, SplitMix64& rng, double bound) {
    for (double& v : m.a) v = rng.uniform(-bound, bound);
}

}  // namespace

std::size_t param_count(const AttnConfig& cfg) {
    const auto d = static_cast<std::size_t>(cfg.embed_dim);
    const auto dh = static_cast<std::size_t>(cfg.head_dim);
    const auto h = static_cast<std::size_t>(cfg.heads);
    std::size_t n = (static_cast<std::size_t>(cfg.p) + 1) * d;  // token embeddings
    n += (static_cast<std::size_t>(cfg.k) + 1) * d;             // positions
    n += static_cast<std::size_t>(cfg.depth) * (3 * h * d * dh + h * dh * d);
    n += d * static_cast<std::size_t>(cfg.p);  // unembedding
    return n;
}

AttnParams init_transformer(const AttnConfig& cfg) {
    validate_cfg(cfg);
    AttnParams params;
    params.cfg = cfg;
    const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.embed_dim));
    SplitMix64 rng(cfg.seed);

    params.tok_embed = Mat(cfg.p + 1, cfg.embed_dim);
    fill_uniform(params.tok_embed, rng, bound);
    params.pos_embed = Mat(cfg.k + 1, cfg.embed_dim);
    fill_uniform(params.pos_embed, rng, bound);
    params.layers.resize(static_cast<std::size_t>(cfg.depth));
    for (AttnLayer& layer : params.layers) {
        layer.wk.assign(static_cast<std::size_t>(cfg.heads), Mat(cfg.embed_dim, cfg.head_dim));
        layer.wq.assign(static_cast<std::size_t>(cfg.heads), Mat(cfg.embed_dim, cfg.head_dim));
        layer.wv.assign(static_cast<std::size_t>(cfg.heads), Mat(cfg.embed_dim, cfg.head_dim));
        for (Mat& m : layer.wk) fill_uniform(m, rng, bound);
        for (Mat& m : layer.wq) fill_uniform(m, rng, bound);
        for (Mat& m : layer.wv) fill_uniform(m, rng, bound);
        layer.wp = Mat(cfg.heads * cfg.head_dim, cfg.embed_dim);
        fill_uniform(layer.wp, rng, bound);
    }
    params.unembed = Mat(cfg.embed_dim, cfg.p);
    fill_uniform(params.unembed, rng, bound);
    return params;
}

AttnRefs attn_leaves(Tape& tape, const AttnParams& params, bool needs_grad) {
    AttnRefs refs;
    refs.tok = tape.leaf(params.tok_embed, needs_grad);
    refs.pos = tape.leaf(params.pos_embed, needs_grad);
    refs.all = {refs.tok, refs.pos};
    for (const AttnLayer& layer : params.layers) {
        AttnRefs::Layer lr;
        for (const Mat& m : layer.wk) lr.wk.push_back(tape.leaf(m, needs_grad));
        for (const Mat& m : layer.wq) lr.wq.push_back(tape.leaf(m, needs_grad));
        for (const Mat& m : layer.wv) lr.wv.push_back(tape.leaf(m, needs_grad));
        lr.wp = tape.leaf(layer.wp, needs_grad);
        for (const Ref r : lr.wk) refs.all.push_back(r);
        for (const Ref r : lr.wq) refs.all.push_back(r);
        for (const Ref r : lr.wv) refs.all.push_back(r);
        refs.all.push_back(lr.wp);
        refs.layers.push_back(std::move(lr));
    }
    refs.unembed = tape.leaf(params.unembed, needs_grad);
    refs.all.push_back(refs.unembed);
    return refs;
}

Ref transformer_logits(Tape& tape, const AttnRefs& refs, const AttnConfig& cfg,
                       const ModAddDataset& ds, std::span<const std::size_t> rows) {
    if (ds.p != cfg.p || ds.k != cfg.k)
        throw std::invalid_argument("transformer_logits: dataset and model disagree on (p, k)");
    if (rows.empty()) throw std::invalid_argument("transformer_logits: empty batch");
    const int r = cfg.k + 1;  // tokens per sample

    std::vector<int> tok_ids, pos_ids;
    tok_ids.reserve(rows.size() * static_cast<std::size_t>(r));
    pos_ids.reserve(rows.size() * static_cast<std::size_t>(r));
    for (const std::size_t row : rows) {
        const auto tuple = ds.row(row);
        for (int j = 0; j < cfg.k; ++j) tok_ids.push_back(tuple[static_cast<std::size_t>(j)]);
        tok_ids.push_back(cfg.p);  // EQUALS
        for (int j = 0; j < r; ++j) pos_ids.push_back(j);
    }

    Ref x = tape.add(tape.gather_rows(refs.tok, std::move(tok_ids)),
                     tape.gather_rows(refs.pos, std::move(pos_ids)));

    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));
    for (const AttnRefs::Layer& layer : refs.layers) {
        std::vector<Ref> head_outs;
        head_outs.reserve(static_cast<std::size_t>(cfg.heads));
        for (int h = 0; h < cfg.heads; ++h) {
            const auto hs = static_cast<std::size_t>(h);
            const Ref keys = tape.matmul(x, layer.wk[hs]);
            const Ref queries = tape.matmul(x, layer.wq[hs]);
            const Ref values = tape.matmul(x, layer.wv[hs]);
            const Ref scores = tape.scale(tape.block_scores(queries, keys, r), inv_sqrt_dh);
            const Ref probs = tape.softmax_rows(scores);
            head_outs.push_back(tape.block_apply(probs, values, r));
        }
        const Ref projected = tape.matmul(tape.concat_cols(head_outs), layer.wp);
        x = cfg.residual ? tape.add(x, projected) : projected;
    }

    std::vector<int> final_rows;
    final_rows.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        final_rows.push_back(static_cast<int>(i) * r + (r - 1));
    return tape.matmul(tape.gather_rows(x, std::move(final_rows)), refs.unembed);
}

Mat transformer_batch_logits(const AttnParams& params, const ModAddDataset& ds,
                             std::span<const std::size_t> rows) {
    Tape tape;
    const AttnRefs refs = attn_leaves(tape, params, /*needs_grad=*/false);
    const Ref logits = transformer_logits(tape, refs, params.cfg, ds, rows);
    return tape.value(logits);
}

std::vector<double> forward_transformer(const AttnParams& params, std::span<const int> a) {
    const AttnConfig& cfg = params.cfg;
    if (a.size() != static_cast<std::size_t>(cfg.k))
        throw std::invalid_argument("forward_transformer: tuple must have k entries");
    ModAddDataset one;
    one.p = cfg.p;
    one.k = cfg.k;
    int sum = 0;
    for (const int ai : a) {
        if (ai < 0 || ai >= cfg.p) throw std::out_of_range("forward_transformer: entry outside Z_p");
        one.inputs.push_back(ai);
        sum += ai;
    }
    one.labels.push_back(static_cast<std::int32_t>(sum % cfg.p));
    const std::size_t row0 = 0;
    const Mat logits = transformer_batch_logits(params, one, std::span<const std::size_t>(&row0, 1));
    return {logits.a.begin(), logits.a.end()};
}

Mat attention_matrix(const AttnParams& params, int layer, int head) {
    const AttnConfig& cfg = params.cfg;
    if (layer < 0 || layer >= cfg.depth) throw std::out_of_range("attention_matrix: bad layer");
    if (head < 0 || head >= cfg.heads) throw std::out_of_range("attention_matrix: bad head");
    const Mat& wk = params.layers[static_cast<std::size_t>(layer)].wk[static_cast<std::size_t>(head)];
    const Mat& wq = params.layers[static_cast<std::size_t>(layer)].wq[static_cast<std::size_t>(head)];
    Mat out(cfg.embed_dim, cfg.embed_dim, 0.0);
    for (int i = 0; i < cfg.embed_dim; ++i)
        for (int t = 0; t < cfg.head_dim; ++t) {
            const double kv = wk.at(i, t);
            if (kv == 0.0) continue;
            for (int j = 0; j < cfg.embed_dim; ++j) out.at(i, j) += kv * wq.at(j, t);
        }
    return out;
}

Mat token_space_attention(const AttnParams& params, int layer, int head) {
    const AttnConfig& cfg = params.cfg;
    const Mat kq = attention_matrix(params, layer, head);
    // E~ (p x d) restricted to value tokens; A = E~ KQ E~^T.
    Mat tmp(cfg.p, cfg.embed_dim, 0.0);
    for (int a = 0; a < cfg.p; ++a)
        for (int i = 0; i < cfg.embed_dim; ++i) {
            const double e = params.tok_embed.at(a, i);
            if (e == 0.0) continue;
            for (int j = 0; j < cfg.embed_dim; ++j) tmp.at(a, j) += e * kq.at(i, j);
        }
    Mat out(cfg.p, cfg.p, 0.0);
    for (int a = 0; a < cfg.p; ++a)
        for (int b = 0; b < cfg.p; ++b) {
            double acc = 0.0;
            for (int j = 0; j < cfg.embed_dim; ++j) acc += tmp.at(a, j) * params.tok_embed.at(b, j);
            out.at(a, b) = acc;
        }
    return out;
}

}  // namespace fc
