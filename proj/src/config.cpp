#include "fc/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

long long parse_int(const std::string& v, int line) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        fail(line, "expected an integer, got '" + v + "'");
    }
    if (used != v.size()) fail(line, "trailing junk after integer '" + v + "'");
    return out;
}

double parse_real(const std::string& v, int line) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        fail(line, "expected a number, got '" + v + "'");
    }
    if (used != v.size()) fail(line, "trailing junk after number '" + v + "'");
    return out;
}

bool parse_flag(const std::string& v, int line) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(line, "expected on/off, got '" + v + "'");
}

void append_real(std::string& out, const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
    out += buf;
}

}  // namespace

TrainConfig parse_config(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::set<std::string> seen;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(line_no, "missing key");
        if (value.empty()) fail(line_no, "missing value for '" + key + "'");
        // "heads" is an alias for "m" (the unit count doubles as the head
        // count for attention models), so both spellings share one slot.
        const std::string canon = key == "heads" ? "m" : key;
        if (!seen.insert(canon).second) fail(line_no, "duplicate key '" + key + "'");

        if (key == "model") {
            if (value == "mlp")
                cfg.model = ModelKind::Mlp;
            else if (value == "attention")
                cfg.model = ModelKind::Attention;
            else
                fail(line_no, "model must be mlp or attention, got '" + value + "'");
        } else if (key == "p") {
            cfg.p = static_cast<int>(parse_int(value, line_no));
        } else if (key == "k") {
            cfg.k = static_cast<int>(parse_int(value, line_no));
        } else if (key == "m" || key == "heads") {
            cfg.m = static_cast<int>(parse_int(value, line_no));
        } else if (key == "embed_dim") {
            cfg.embed_dim = static_cast<int>(parse_int(value, line_no));
        } else if (key == "head_dim") {
            cfg.head_dim = static_cast<int>(parse_int(value, line_no));
        } else if (key == "depth") {
            cfg.depth = static_cast<int>(parse_int(value, line_no));
        } else if (key == "residual") {
            cfg.residual = parse_flag(value, line_no);
        } else if (key == "steps") {
            cfg.steps = parse_int(value, line_no);
        } else if (key == "batch") {
            cfg.batch = static_cast<int>(parse_int(value, line_no));
        } else if (key == "lr") {
            cfg.lr = parse_real(value, line_no);
        } else if (key == "lambda") {
            cfg.lambda = parse_real(value, line_no);
        } else if (key == "optimizer") {
            if (value == "sgd")
                cfg.optimizer = OptimizerKind::Sgd;
            else if (value == "adamw")
                cfg.optimizer = OptimizerKind::AdamW;
            else
                fail(line_no, "optimizer must be sgd or adamw, got '" + value + "'");
        } else if (key == "beta1") {
            cfg.beta1 = parse_real(value, line_no);
        } else if (key == "beta2") {
            cfg.beta2 = parse_real(value, line_no);
        } else if (key == "eps") {
            cfg.eps = parse_real(value, line_no);
        } else if (key == "weight_decay") {
            cfg.weight_decay = parse_real(value, line_no);
        } else if (key == "warmup") {
            cfg.warmup = static_cast<int>(parse_int(value, line_no));
        } else if (key == "split") {
            cfg.split_fraction = parse_real(value, line_no);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int(value, line_no));
        } else if (key == "eval_every") {
            cfg.eval_every = parse_int(value, line_no);
        } else if (key == "track_margin") {
            cfg.track_margin = parse_flag(value, line_no);
        } else {
            fail(line_no, "unknown key '" + key + "'");
        }
    }
    return cfg;
}

TrainConfig parse_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const TrainConfig& cfg) {
    std::string out;
    out += "model = ";
    out += cfg.model == ModelKind::Mlp ? "mlp" : "attention";
    out += '\n';
    out += "p = " + std::to_string(cfg.p) + '\n';
    out += "k = " + std::to_string(cfg.k) + '\n';
    out += "m = " + std::to_string(cfg.m) + '\n';
    out += "embed_dim = " + std::to_string(cfg.embed_dim) + '\n';
    out += "head_dim = " + std::to_string(cfg.head_dim) + '\n';
    out += "depth = " + std::to_string(cfg.depth) + '\n';
    out += "residual = ";
    out += cfg.residual ? "on" : "off";
    out += '\n';
    out += "steps = " + std::to_string(cfg.steps) + '\n';
    out += "batch = " + std::to_string(cfg.batch) + '\n';
    append_real(out, "lr", cfg.lr);
    append_real(out, "lambda", cfg.lambda);
    out += "optimizer = ";
    out += cfg.optimizer == OptimizerKind::Sgd ? "sgd" : "adamw";
    out += '\n';
    append_real(out, "beta1", cfg.beta1);
    append_real(out, "beta2", cfg.beta2);
    append_real(out, "eps", cfg.eps);
    append_real(out, "weight_decay", cfg.weight_decay);
    out += "warmup = " + std::to_string(cfg.warmup) + '\n';
    append_real(out, "split", cfg.split_fraction);
    out += "seed = " + std::to_string(cfg.seed) + '\n';
    out += "eval_every = " + std::to_string(cfg.eval_every) + '\n';
    out += "track_margin = ";
    out += cfg.track_margin ? "on" : "off";
    out += '\n';
    return out;
}

}  // namespace fc
