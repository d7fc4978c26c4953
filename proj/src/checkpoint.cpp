#include "fc/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fc {

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
    json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["data"] = m.a;
    return j;
}

Mat mat_from_json(const json& j) {
    Mat m(j.at("rows").get<int>(), j.at("cols").get<int>());
    const auto& data = j.at("data");
    if (data.size() != m.size()) throw std::runtime_error("checkpoint: tensor size mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) m.a[i] = data[i].get<double>();
    return m;
}

std::string head_key(int layer, int head, const char* which) {
    return "layer" + std::to_string(layer) + ".head" + std::to_string(head) + "." + which;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path, const std::string& config_echo) {
    json j;
    j["version"] = "fc-ckpt-1";
    j["p"] = model.p();
    j["k"] = model.k();
    if (!config_echo.empty()) j["config"] = config_echo;

    json params;
    if (model.kind == ModelKind::Mlp) {
        j["kind"] = "mlp";
        j["m"] = model.mlp.m();
        const std::vector<Mat> mats = pack_mlp(model.mlp);
        for (int t = 0; t < model.mlp.k; ++t)
            params["u_" + std::to_string(t + 1)] = mat_to_json(mats[static_cast<std::size_t>(t)]);
        params["w"] = mat_to_json(mats.back());
    } else {
        const AttnConfig& cfg = model.attn.cfg;
        j["kind"] = "attention";
        j["heads"] = cfg.heads;
        j["embed_dim"] = cfg.embed_dim;
        j["head_dim"] = cfg.head_dim;
        j["depth"] = cfg.depth;
        j["residual"] = cfg.residual;
        j["seed"] = cfg.seed;
        params["tok_embed"] = mat_to_json(model.attn.tok_embed);
        params["pos_embed"] = mat_to_json(model.attn.pos_embed);
        for (int l = 0; l < cfg.depth; ++l) {
            const AttnLayer& layer = model.attn.layers[static_cast<std::size_t>(l)];
            for (int h = 0; h < cfg.heads; ++h) {
                params[head_key(l, h, "wk")] = mat_to_json(layer.wk[static_cast<std::size_t>(h)]);
                params[head_key(l, h, "wq")] = mat_to_json(layer.wq[static_cast<std::size_t>(h)]);
                params[head_key(l, h, "wv")] = mat_to_json(layer.wv[static_cast<std::size_t>(h)]);
            }
            params["layer" + std::to_string(l) + ".wp"] = mat_to_json(layer.wp);
        }
        params["unembed"] = mat_to_json(model.attn.unembed);
    }
    j["params"] = std::move(params);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << j.dump(1, '\t') << '\n';
    if (!f) throw std::runtime_error("write failed: " + path);
}

Model load_checkpoint(const std::string& path, std::string* config_echo) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("checkpoint parse error in " + path + ": " + e.what());
    }
    if (j.value("version", "") != std::string("fc-ckpt-1"))
        throw std::runtime_error("checkpoint: unsupported version tag");
    if (config_echo) *config_echo = j.value("config", "");

    Model model;
    const int p = j.at("p").get<int>();
    const int k = j.at("k").get<int>();
    const json& params = j.at("params");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mlp") {
        model.kind = ModelKind::Mlp;
        std::vector<Mat> mats;
        for (int t = 0; t < k; ++t) mats.push_back(mat_from_json(params.at("u_" + std::to_string(t + 1))));
        mats.push_back(mat_from_json(params.at("w")));
        model.mlp = unpack_mlp(mats, p, k);
    } else if (kind == "attention") {
        model.kind = ModelKind::Attention;
        AttnConfig cfg;
        cfg.p = p;
        cfg.k = k;
        cfg.heads = j.at("heads").get<int>();
        cfg.embed_dim = j.at("embed_dim").get<int>();
        cfg.head_dim = j.at("head_dim").get<int>();
        cfg.depth = j.at("depth").get<int>();
        cfg.residual = j.at("residual").get<bool>();
        cfg.seed = j.value("seed", std::uint64_t{0});
        model.attn.cfg = cfg;
        model.attn.tok_embed = mat_from_json(params.at("tok_embed"));
        model.attn.pos_embed = mat_from_json(params.at("pos_embed"));
        model.attn.layers.resize(static_cast<std::size_t>(cfg.depth));
        for (int l = 0; l < cfg.depth; ++l) {
            AttnLayer& layer = model.attn.layers[static_cast<std::size_t>(l)];
            for (int h = 0; h < cfg.heads; ++h) {
                layer.wk.push_back(mat_from_json(params.at(head_key(l, h, "wk"))));
                layer.wq.push_back(mat_from_json(params.at(head_key(l, h, "wq"))));
                layer.wv.push_back(mat_from_json(params.at(head_key(l, h, "wv"))));
            }
            layer.wp = mat_from_json(params.at("layer" + std::to_string(l) + ".wp"));
        }
        model.attn.unembed = mat_from_json(params.at("unembed"));
    } else {
        throw std::runtime_error("checkpoint: unknown model kind '" + kind + "'");
    }
    return model;
}

}  // namespace fc
