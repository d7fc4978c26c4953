#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fc/checkpoint.hpp"
#include "fc/config.hpp"
#include "fc/construction.hpp"
#include "fc/training.hpp"
#include "fc/transformer.hpp"

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/fc_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("mlp checkpoints round trip bit for bit") {
    fc::Model model;
    model.kind = fc::ModelKind::Mlp;
    model.mlp = fc::construct_max_margin(5, 2);

    const TempFile tmp("mlp.json");
    fc::save_checkpoint(model, tmp.path, "p = 5\nk = 2\n");
    std::string echo;
    const fc::Model back = fc::load_checkpoint(tmp.path, &echo);
    CHECK(echo == "p = 5\nk = 2\n");
    REQUIRE(back.kind == fc::ModelKind::Mlp);
    REQUIRE(back.mlp.p == 5);
    REQUIRE(back.mlp.k == 2);
    REQUIRE(back.mlp.m() == model.mlp.m());
    for (int i = 0; i < model.mlp.m(); ++i) {
        const auto& a = model.mlp.neurons[static_cast<std::size_t>(i)];
        const auto& b = back.mlp.neurons[static_cast<std::size_t>(i)];
        CHECK(a.w == b.w);  // exact, not approximate
        for (int j = 0; j < 2; ++j)
            CHECK(a.u[static_cast<std::size_t>(j)] == b.u[static_cast<std::size_t>(j)]);
    }
}

TEST_CASE("attention checkpoints round trip bit for bit") {
    fc::AttnConfig cfg;
    cfg.p = 7;
    cfg.k = 3;
    cfg.heads = 3;
    cfg.embed_dim = 6;
    cfg.head_dim = 2;
    cfg.depth = 2;
    cfg.residual = false;
    cfg.seed = 12;
    fc::Model model;
    model.kind = fc::ModelKind::Attention;
    model.attn = fc::init_transformer(cfg);

    const TempFile tmp("attn.json");
    fc::save_checkpoint(model, tmp.path);
    const fc::Model back = fc::load_checkpoint(tmp.path);
    REQUIRE(back.kind == fc::ModelKind::Attention);
    CHECK(back.attn.cfg.p == 7);
    CHECK(back.attn.cfg.heads == 3);
    CHECK(back.attn.cfg.depth == 2);
    CHECK(back.attn.cfg.residual == false);
    CHECK(back.attn.tok_embed.a == model.attn.tok_embed.a);
    CHECK(back.attn.pos_embed.a == model.attn.pos_embed.a);
    CHECK(back.attn.unembed.a == model.attn.unembed.a);
    for (int l = 0; l < 2; ++l) {
        const auto& la = model.attn.layers[static_cast<std::size_t>(l)];
        const auto& lb = back.attn.layers[static_cast<std::size_t>(l)];
        CHECK(la.wp.a == lb.wp.a);
        for (int h = 0; h < 3; ++h) {
            CHECK(la.wk[static_cast<std::size_t>(h)].a == lb.wk[static_cast<std::size_t>(h)].a);
            CHECK(la.wq[static_cast<std::size_t>(h)].a == lb.wq[static_cast<std::size_t>(h)].a);
            CHECK(la.wv[static_cast<std::size_t>(h)].a == lb.wv[static_cast<std::size_t>(h)].a);
        }
    }
}

TEST_CASE("checkpoint loader rejects foreign or damaged files") {
    const TempFile tmp("bad.json");
    {
        std::ofstream f(tmp.path);
        f << "{\"format\": \"other-1\", \"params\": {}}";
    }
    CHECK_THROWS_AS(fc::load_checkpoint(tmp.path), std::runtime_error);
    {
        std::ofstream f(tmp.path);
        f << "not json at all";
    }
    CHECK_THROWS(fc::load_checkpoint(tmp.path));
    CHECK_THROWS_AS(fc::load_checkpoint("/nonexistent/nowhere.json"), std::runtime_error);
}

TEST_CASE("config grammar: parse and serialize round trip") {
    const std::string text =
        "# training run\n"
        "model = attention\n"
        "p = 7\n"
        "k = 3\n"
        "heads = 4\n"
        "embed_dim = 16   # residual width\n"
        "head_dim = 4\n"
        "depth = 2\n"
        "residual = off\n"
        "steps = 1234\n"
        "batch = 64\n"
        "lr = 2.5e-3\n"
        "lambda = 0.001\n"
        "optimizer = sgd\n"
        "weight_decay = 0.01\n"
        "warmup = 25\n"
        "split = 0.4\n"
        "seed = 9\n"
        "eval_every = 50\n";
    const fc::TrainConfig cfg = fc::parse_config(text);
    CHECK(cfg.model == fc::ModelKind::Attention);
    CHECK(cfg.p == 7);
    CHECK(cfg.k == 3);
    CHECK(cfg.m == 4);  // via the heads alias
    CHECK(cfg.embed_dim == 16);
    CHECK(cfg.depth == 2);
    CHECK(cfg.residual == false);
    CHECK(cfg.steps == 1234);
    CHECK(cfg.batch == 64);
    CHECK(cfg.lr == doctest::Approx(2.5e-3));
    CHECK(cfg.lambda == doctest::Approx(0.001));
    CHECK(cfg.optimizer == fc::OptimizerKind::Sgd);
    CHECK(cfg.weight_decay == doctest::Approx(0.01));
    CHECK(cfg.warmup == 25);
    CHECK(cfg.split_fraction == doctest::Approx(0.4));
    CHECK(cfg.seed == 9);
    CHECK(cfg.eval_every == 50);

    // Serialization is a fixed point: parse(serialize(cfg)) == cfg.
    const std::string canon = fc::serialize_config(cfg);
    const fc::TrainConfig again = fc::parse_config(canon);
    CHECK(fc::serialize_config(again) == canon);
}

TEST_CASE("config errors carry line numbers") {
    const auto message_of = [](const std::string& text) {
        try {
            fc::parse_config(text);
        } catch (const std::exception& e) {
            return std::string(e.what());
        }
        return std::string("(no error)");
    };

    CHECK(message_of("p = 5\nwat = 9\n").find("line 2") != std::string::npos);
    CHECK(message_of("p = 5\nwat = 9\n").find("wat") != std::string::npos);
    CHECK(message_of("p = 5\np = 7\n").find("duplicate") != std::string::npos);
    CHECK(message_of("m = 4\nheads = 4\n").find("duplicate") != std::string::npos);
    CHECK(message_of("p five\n").find("line 1") != std::string::npos);
    CHECK(message_of("p = \n").find("missing value") != std::string::npos);
    CHECK(message_of("lr = fast\n").find("line 1") != std::string::npos);
    CHECK(message_of("residual = maybe\n").find("line 1") != std::string::npos);
    CHECK(message_of("model = cnn\n").find("mlp or attention") != std::string::npos);
}

TEST_CASE("flag spellings") {
    CHECK(fc::parse_config("residual = on\n").residual == true);
    CHECK(fc::parse_config("residual = off\n").residual == false);
    CHECK(fc::parse_config("residual = true\n").residual == true);
    CHECK(fc::parse_config("residual = 0\n").residual == false);
    CHECK(fc::parse_config("track_margin = 1\n").track_margin == true);
}

TEST_CASE("defaults survive an empty config") {
    const fc::TrainConfig cfg = fc::parse_config("# nothing but comments\n\n");
    const fc::TrainConfig fresh;
    CHECK(cfg.p == fresh.p);
    CHECK(cfg.steps == fresh.steps);
    CHECK(cfg.lr == fresh.lr);
    CHECK(fc::serialize_config(cfg) == fc::serialize_config(fresh));
}

TEST_CASE("config file loader") {
    const TempFile tmp("cfg.cfg");
    {
        std::ofstream f(tmp.path);
        f << "p = 11\nseed = 3\n";
    }
    const fc::TrainConfig cfg = fc::parse_config_file(tmp.path);
    CHECK(cfg.p == 11);
    CHECK(cfg.seed == 3);
    CHECK_THROWS_AS(fc::parse_config_file("/nonexistent/nowhere.cfg"), std::runtime_error);
}
