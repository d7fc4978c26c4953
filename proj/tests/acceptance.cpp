// Acceptance battery. Each criterion prints exactly one [PASS]/[FAIL] line
// with its headline metrics; the process exits 0 only if every requested
// criterion passed.
//
//   fc_acceptance        run all nine criteria
//   fc_acceptance <n>    run criterion n alone (what the ctest entries do)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fc/autodiff.hpp"
#include "fc/construction.hpp"
#include "fc/dataset.hpp"
#include "fc/fourier.hpp"
#include "fc/mlp.hpp"
#include "fc/prng.hpp"
#include "fc/training.hpp"
#include "fc/transformer.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CaseKP {
    int k;
    int p;
};

// The five construction cases gated by criteria 1 and 2.
const CaseKP kMarginCases[] = {{2, 5}, {2, 11}, {3, 5}, {3, 7}, {4, 5}};

// ------------------------------------------------------------- criterion 1
// Indicator exactness against the {(p-1)/2, 0} pattern. The constructed
// network is exactly two-level, but its wrong-class level is -1/2, not 0:
// sum_{zeta=1}^{(p-1)/2} cos(2 pi zeta x / p) = -1/2 for every x != 0. The
// 0.5 deviation below is that fact, measured; the two-level deviation shows
// the construction itself is exact to machine precision.
bool criterion1() {
    double worst_spec = 0.0;
    double worst_two_level = 0.0;
    double slowest = 0.0;
    for (const CaseKP kp : kMarginCases) {
        const fc::MlpParams net = fc::construct_max_margin(kp.p, kp.k);
        const auto t0 = Clock::now();
        const fc::IndicatorReport spec =
            fc::deviation_from_pattern(net, (kp.p - 1) / 2.0, 0.0);
        slowest = std::max(slowest, seconds_since(t0));
        const fc::IndicatorReport attained = fc::verify_indicator(net);
        worst_spec = std::max(worst_spec, spec.max_deviation);
        worst_two_level = std::max(worst_two_level, attained.max_deviation);
    }
    const bool pass = worst_spec < 1e-9 && slowest < 5.0;
    std::printf(
        "[%s] criterion 1: max deviation from {(p-1)/2, 0} pattern = %.3g "
        "(tol 1e-9) -- wrong-class level is exactly -1/2, deviation from "
        "{(p-1)/2, -1/2} = %.3g; slowest case %.2f s\n",
        pass ? "PASS" : "FAIL", worst_spec, worst_two_level, slowest);
    return pass;
}

// ------------------------------------------------------------- criterion 2
// Normalized margin of the unit-norm constructed network equals gamma*, and
// the k=3 closed form matches 3/(16 p (p-1)) exactly.
bool criterion2() {
    double worst_rel = 0.0;
    bool closed_form_ok = true;
    for (const CaseKP kp : kMarginCases) {
        const fc::MlpParams unit =
            fc::normalize_network(fc::construct_max_margin(kp.p, kp.k));
        const fc::ModAddDataset ds = fc::generate_full(kp.p, kp.k);
        const fc::MarginReport rep = fc::dataset_margin_h(unit, ds);
        const double gs = fc::gamma_star(kp.k, kp.p);
        worst_rel = std::max(worst_rel, std::abs(rep.normalized_margin - gs) / gs);
        if (kp.k == 3 && gs != 3.0 / (16.0 * kp.p * (kp.p - 1))) closed_form_ok = false;
    }
    const bool pass = worst_rel < 1e-9 && closed_form_ok;
    std::printf(
        "[%s] criterion 2: unit-norm margin vs gamma* max rel err %.3g "
        "(tol 1e-9) over 5 cases; k=3 closed form 3/(16 p (p-1)) %s\n",
        pass ? "PASS" : "FAIL", worst_rel, closed_form_ok ? "exact" : "VIOLATED");
    return pass;
}

// ------------------------------------------------------------- criterion 3
// The unit-L2 cosine neuron attains gamma* as its class-weighted objective,
// and 10,000 random unit-L2 neurons never beat it.
bool criterion3() {
    const auto t0 = Clock::now();
    double worst_rel = 0.0;
    double max_excess = -1e300;
    for (const CaseKP kp : {CaseKP{2, 5}, CaseKP{3, 5}}) {
        const double gs = fc::gamma_star(kp.k, kp.p);

        fc::CosineNeuronSpec spec;
        spec.p = kp.p;
        spec.k = kp.k;
        spec.zeta = 1;
        spec.u_phases.assign(static_cast<std::size_t>(kp.k), 0.0);
        spec.w_phase = 0.0;
        spec.beta = fc::unit_l2_beta(kp.k, kp.p);
        const fc::NeuronParams star = fc::cosine_neuron(spec);
        const double obj = fc::neuron_weighted_objective(star);
        worst_rel = std::max(worst_rel, std::abs(obj - gs) / gs);

        fc::SplitMix64 rng(static_cast<std::uint64_t>(1000 * kp.k + kp.p));
        for (int trial = 0; trial < 10000; ++trial) {
            fc::NeuronParams n;
            n.u.assign(static_cast<std::size_t>(kp.k),
                       std::vector<double>(static_cast<std::size_t>(kp.p)));
            n.w.resize(static_cast<std::size_t>(kp.p));
            for (std::vector<double>& uj : n.u)
                for (double& v : uj) v = rng.normal();
            for (double& v : n.w) v = rng.normal();
            const double len = fc::neuron_l2(n);
            for (std::vector<double>& uj : n.u)
                for (double& v : uj) v /= len;
            for (double& v : n.w) v /= len;
            max_excess = std::max(max_excess, fc::neuron_weighted_objective(n) - gs);
        }
    }
    const double t = seconds_since(t0);
    const bool pass = worst_rel < 1e-9 && max_excess <= 1e-12 && t < 60.0;
    std::printf(
        "[%s] criterion 3: cosine objective vs gamma* max rel err %.3g "
        "(tol 1e-9); max excess over 2x10000 random unit neurons %.3g "
        "(cap 1e-12); %.1f s\n",
        pass ? "PASS" : "FAIL", worst_rel, max_excess, t);
    return pass;
}

// ------------------------------------------------------------- criterion 4
// Identity suites on random draws: the signed power-sum expansion of the
// product (k <= 6) and the sin/cos expansion of cos(x_1 + ... + x_{k+1})
// (k <= 5). tol = 1e-12 absolute plus 1e-9 relative.
bool criterion4() {
    fc::SplitMix64 rng(41);
    double worst_ratio = 0.0;  // |lhs-rhs| / (1e-12 + 1e-9 max(|lhs|,|rhs|))
    auto record = [&](double lhs, double rhs) {
        const double allow = 1e-12 + 1e-9 * std::max(std::abs(lhs), std::abs(rhs));
        worst_ratio = std::max(worst_ratio, std::abs(lhs - rhs) / allow);
    };

    for (int k = 2; k <= 6; ++k) {
        const std::vector<fc::SignedTerm> terms = fc::sum_to_product_terms(k);
        double factorial = 1.0;
        for (int j = 2; j <= k; ++j) factorial *= j;
        const double scale = std::ldexp(factorial, k - 1);  // 2^{k-1} k!
        for (int draw = 0; draw < 1000; ++draw) {
            std::vector<double> d(static_cast<std::size_t>(k));
            double lhs = scale;
            for (double& v : d) {
                v = rng.uniform(-1.0, 1.0);
                lhs *= v;
            }
            double rhs = 0.0;
            for (const fc::SignedTerm& term : terms) {
                double s = 0.0;
                for (int j = 0; j < k; ++j)
                    s += term.signs[static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(j)];
                rhs += term.coefficient * std::pow(s, k);
            }
            record(lhs, rhs);
        }
    }

    for (int k = 2; k <= 5; ++k) {
        const std::vector<fc::TrigTerm> terms = fc::cos_sum_expansion(k);
        for (int draw = 0; draw < 1000; ++draw) {
            std::vector<double> x(static_cast<std::size_t>(k) + 1);
            double total = 0.0;
            for (double& v : x) {
                v = rng.uniform(-3.141592653589793, 3.141592653589793);
                total += v;
            }
            const double lhs = std::cos(total);
            double rhs = 0.0;
            for (const fc::TrigTerm& term : terms) {
                double prod = term.sign;
                for (int i = 0; i <= k; ++i) {
                    const std::size_t is = static_cast<std::size_t>(i);
                    prod *= term.b[is] ? std::sin(x[is]) : std::cos(x[is]);
                }
                rhs += prod;
            }
            record(lhs, rhs);
        }
    }

    const bool pass = worst_ratio <= 1.0;
    std::printf(
        "[%s] criterion 4: sum-to-product (k<=6) and cos-sum (k<=5) on 1000 "
        "draws each, worst error %.3g of the 1e-12 + 1e-9-rel allowance\n",
        pass ? "PASS" : "FAIL", worst_ratio);
    return pass;
}

// ------------------------------------------------------------- criterion 5
// Fourier infrastructure: Plancherel, DFT/IDFT round trip, and positivity of
// the diagonal transform coefficients on constructed networks.
bool criterion5() {
    fc::SplitMix64 rng(5150);
    double worst_planch = 0.0;
    double worst_round = 0.0;
    for (const int p : {5, 11, 31, 97}) {
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> u(static_cast<std::size_t>(p));
            double time_energy = 0.0;
            for (double& v : u) {
                v = rng.uniform(-2.0, 2.0);
                time_energy += v * v;
            }
            const fc::Spectrum s = fc::dft1(u);
            double freq_energy = 0.0;
            for (const std::complex<double>& c : s.coeffs) freq_energy += std::norm(c);
            worst_planch = std::max(
                worst_planch, std::abs(freq_energy - p * time_energy) / (p * time_energy));
            const std::vector<double> back = fc::idft1(s);
            for (int a = 0; a < p; ++a) {
                const std::size_t as = static_cast<std::size_t>(a);
                worst_round = std::max(worst_round, std::abs(back[as] - u[as]));
            }
        }
    }

    double min_real = 1e300;
    double max_abs_imag = 0.0;
    for (const int p : {3, 5, 7}) {
        for (const int k : {2, 3}) {
            const fc::MlpParams net = fc::construct_max_margin(p, k);
            const auto eval = fc::make_network_evaluator(net);
            for (int zeta = 1; zeta <= (p - 1) / 2; ++zeta) {
                std::vector<int> idx(static_cast<std::size_t>(k), zeta);
                idx.push_back(-zeta);
                const std::complex<double> coeff = fc::network_dft(eval, p, k, idx);
                min_real = std::min(min_real, coeff.real());
                max_abs_imag = std::max(max_abs_imag, std::abs(coeff.imag()));
            }
        }
    }

    const bool pass = worst_planch < 1e-12 && worst_round < 1e-12 && min_real > 0.0;
    std::printf(
        "[%s] criterion 5: Plancherel rel err %.3g, roundtrip err %.3g "
        "(tol 1e-12); diagonal transform min real part %.3g > 0 "
        "(|imag| <= %.3g) on constructed nets p<=7, k<=3\n",
        pass ? "PASS" : "FAIL", worst_planch, worst_round, min_real, max_abs_imag);
    return pass;
}

// ------------------------------------------------------------- criterion 6
// Autodiff gradients vs central finite differences at random points, on both
// training objectives (data loss + norm penalty).
bool criterion6() {
    const auto t0 = Clock::now();
    fc::SplitMix64 rng(606);
    const double lambda = 0.05;

    // Polynomial network objective at p=5, k=2, m=4 over the full dataset.
    double worst_mlp = 0.0;
    {
        const int p = 5, k = 2, m = 4;
        const fc::ModAddDataset ds = fc::generate_full(p, k);
        const std::vector<int> labels(ds.labels.begin(), ds.labels.end());
        std::vector<std::vector<int>> gather(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < ds.size(); ++i)
            for (int j = 0; j < k; ++j)
                gather[static_cast<std::size_t>(j)].push_back(ds.row(i)[static_cast<std::size_t>(j)]);

        std::vector<fc::Mat> shapes;
        for (int j = 0; j < k; ++j) shapes.emplace_back(p, m);
        shapes.emplace_back(m, p);
        std::size_t dim = 0;
        for (const fc::Mat& mm : shapes) dim += mm.size();

        auto f = [&](std::span<const double> x, std::span<double> grad_out) {
            std::vector<fc::Mat> mats = shapes;
            std::size_t off = 0;
            for (fc::Mat& mm : mats) {
                std::copy(x.begin() + static_cast<std::ptrdiff_t>(off),
                          x.begin() + static_cast<std::ptrdiff_t>(off + mm.size()),
                          mm.a.begin());
                off += mm.size();
            }
            fc::Tape tape;
            std::vector<fc::Ref> leaves;
            for (const fc::Mat& mm : mats) leaves.push_back(tape.leaf(mm, true));
            fc::Ref acts = tape.gather_rows(leaves[0], gather[0]);
            for (int j = 1; j < k; ++j)
                acts = tape.add(acts, tape.gather_rows(leaves[static_cast<std::size_t>(j)],
                                                       gather[static_cast<std::size_t>(j)]));
            const fc::Ref logits =
                tape.matmul(tape.integer_power(acts, k), leaves[static_cast<std::size_t>(k)]);
            const fc::Ref ce = tape.cross_entropy(logits, labels);
            const std::span<const fc::Ref> us{leaves.data(), static_cast<std::size_t>(k)};
            const fc::Ref gn = tape.group_norm_mlp(us, leaves[static_cast<std::size_t>(k)], k + 1);
            const fc::Ref loss = tape.add(ce, tape.scale(gn, lambda));
            const double value = tape.scalar_value(loss);
            if (!grad_out.empty()) {
                tape.backward(loss);
                std::size_t o = 0;
                for (const fc::Ref leaf : leaves) {
                    const fc::Mat& g = tape.grad(leaf);
                    std::copy(g.a.begin(), g.a.end(),
                              grad_out.begin() + static_cast<std::ptrdiff_t>(o));
                    o += g.size();
                }
            }
            return value;
        };

        for (int point = 0; point < 20; ++point) {
            std::vector<double> x(dim);
            for (double& v : x) v = 0.5 * rng.normal();
            const fc::GradCheckReport rep = fc::grad_check(f, x, 1e-5);
            worst_mlp = std::max(worst_mlp, rep.max_rel_err);
        }
    }

    // Attention objective at p=5, k=2, two heads, two layers, on 8 rows.
    double worst_attn = 0.0;
    {
        fc::AttnConfig cfg;
        cfg.p = 5;
        cfg.k = 2;
        cfg.heads = 2;
        cfg.embed_dim = 8;
        cfg.head_dim = 2;
        cfg.depth = 2;
        cfg.residual = true;
        const fc::ModAddDataset ds = fc::generate_full(cfg.p, cfg.k);
        const std::vector<std::size_t> rows{0, 3, 7, 11, 14, 19, 22, 24};
        std::vector<int> labels;
        for (const std::size_t r : rows) labels.push_back(ds.labels[r]);

        auto mats_of = [](fc::AttnParams& ps) {
            std::vector<fc::Mat*> all{&ps.tok_embed, &ps.pos_embed};
            for (fc::AttnLayer& layer : ps.layers) {
                for (fc::Mat& mm : layer.wk) all.push_back(&mm);
                for (fc::Mat& mm : layer.wq) all.push_back(&mm);
                for (fc::Mat& mm : layer.wv) all.push_back(&mm);
                all.push_back(&layer.wp);
            }
            all.push_back(&ps.unembed);
            return all;
        };

        fc::AttnParams proto = fc::init_transformer(cfg);
        std::size_t dim = 0;
        for (const fc::Mat* mm : mats_of(proto)) dim += mm->size();

        auto f = [&](std::span<const double> x, std::span<double> grad_out) {
            fc::AttnParams point = proto;
            std::size_t off = 0;
            for (fc::Mat* mm : mats_of(point)) {
                std::copy(x.begin() + static_cast<std::ptrdiff_t>(off),
                          x.begin() + static_cast<std::ptrdiff_t>(off + mm->size()),
                          mm->a.begin());
                off += mm->size();
            }
            fc::Tape tape;
            const fc::AttnRefs refs = fc::attn_leaves(tape, point, true);
            const fc::Ref logits = fc::transformer_logits(tape, refs, cfg, ds, rows);
            const fc::Ref ce = tape.cross_entropy(logits, labels);
            const fc::Ref reg = tape.global_l2(refs.all);
            const fc::Ref loss = tape.add(ce, tape.scale(reg, lambda));
            const double value = tape.scalar_value(loss);
            if (!grad_out.empty()) {
                tape.backward(loss);
                std::size_t o = 0;
                for (const fc::Ref leaf : refs.all) {
                    const fc::Mat& g = tape.grad(leaf);
                    std::copy(g.a.begin(), g.a.end(),
                              grad_out.begin() + static_cast<std::ptrdiff_t>(o));
                    o += g.size();
                }
            }
            return value;
        };

        for (int point = 0; point < 20; ++point) {
            std::vector<double> x(dim);
            for (double& v : x) v = 0.3 * rng.normal();
            const fc::GradCheckReport rep = fc::grad_check(f, x, 1e-5);
            worst_attn = std::max(worst_attn, rep.max_rel_err);
        }
    }

    const double t = seconds_since(t0);
    const bool pass = worst_mlp < 1e-6 && worst_attn < 1e-4 && t < 30.0;
    std::printf(
        "[%s] criterion 6: grad vs central differences at 20 random points "
        "each -- mlp max rel err %.3g (tol 1e-6), attention %.3g (tol 1e-4); "
        "%.1f s\n",
        pass ? "PASS" : "FAIL", worst_mlp, worst_attn, t);
    return pass;
}

// ------------------------------------------------------------- criterion 7
// Scaled training reproduction: p=11, k=3, m=160, full batch-1024 AdamW. On
// at least two of three seeds the trained network must fit the training set
// and decompose into near-pure cosine units covering all five frequencies.
bool criterion7() {
    const auto t0 = Clock::now();
    int ok = 0;
    std::string detail;
    for (const std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        fc::TrainConfig cfg;
        cfg.model = fc::ModelKind::Mlp;
        cfg.p = 11;
        cfg.k = 3;
        cfg.m = 160;
        cfg.steps = 2000;
        cfg.batch = 1024;
        cfg.lr = 5e-3;
        cfg.lambda = 0.005;
        cfg.optimizer = fc::OptimizerKind::AdamW;
        cfg.beta1 = 0.9;
        cfg.beta2 = 0.98;
        cfg.warmup = 10;
        cfg.split_fraction = 1.0;
        cfg.seed = seed;
        cfg.eval_every = 500;
        const fc::TrainResult res = fc::train(cfg);

        const double train_acc = res.trace.rows.back().train_acc;
        double max_len = 0.0;
        for (const fc::NeuronParams& n : res.model.mlp.neurons)
            max_len = std::max(max_len, fc::neuron_l2(n));
        int active = 0;
        int strong = 0;
        std::set<int> covered;
        for (const fc::NeuronParams& n : res.model.mlp.neurons) {
            if (fc::neuron_l2(n) < 0.01 * max_len) continue;
            ++active;
            const fc::PowerPeak peak = fc::neuron_power_peak(n);
            if (peak.normalized_power >= 0.9) ++strong;
            covered.insert(peak.frequency);
        }
        const double frac = active > 0 ? static_cast<double>(strong) / active : 0.0;
        const bool seed_ok =
            train_acc >= 0.99 && frac >= 0.8 && covered.size() == 5 && !res.diverged;
        ok += seed_ok ? 1 : 0;
        char buf[96];
        std::snprintf(buf, sizeof buf, " seed%llu(acc %.3f, pure %.3f, freqs %zu/5)",
                      static_cast<unsigned long long>(seed), train_acc, frac,
                      covered.size());
        detail += buf;
    }
    const double t = seconds_since(t0);
    const bool pass = ok >= 2 && t < 900.0;
    std::printf(
        "[%s] criterion 7: %d/3 seeds reach train acc >= 0.99 with >= 80%% "
        "near-pure active units and 5/5 frequencies --%s; %.0f s\n",
        pass ? "PASS" : "FAIL", ok, detail.c_str(), t);
    return pass;
}

// ------------------------------------------------------------- criterion 8
// Scaled grokking: attention-only transformer on k=2, p=31 with a 50% split,
// AdamW lr 1e-3, decoupled weight decay 1e-3. Train accuracy must cross 0.99
// strictly before validation accuracy does on at least two of three seeds.
// Seeds run sequentially and stop as soon as the verdict is decided.
//
// The frozen configuration is the best of an extensive sweep (capacity,
// batch, Adam eps, horizon up to 2e6 steps, residual wiring). The residual
// stream is disabled: with it on, validation accuracy never leaves chance
// (the skip connection carries a pure-memorization solution); without it
// the heads form diagonal (zeta, -zeta) frequency pairs and validation
// accuracy rises with circuit coverage. The per-seed val_max below records
// how far that partial generalization got.
bool criterion8() {
    const auto t0 = Clock::now();
    int ok = 0;
    int failed = 0;
    std::string detail;
    for (const std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        if (ok >= 2 || failed >= 2) break;
        fc::TrainConfig cfg;
        cfg.model = fc::ModelKind::Attention;
        cfg.p = 31;
        cfg.k = 2;
        cfg.m = 8;  // heads
        cfg.embed_dim = 64;
        cfg.head_dim = 8;
        cfg.depth = 2;
        cfg.residual = false;
        cfg.steps = 150000;
        cfg.batch = 16;
        cfg.lr = 1e-3;
        cfg.lambda = 0.0;
        cfg.optimizer = fc::OptimizerKind::AdamW;
        cfg.beta1 = 0.9;
        cfg.beta2 = 0.98;
        cfg.eps = 1e-10;
        cfg.weight_decay = 1e-3;
        cfg.warmup = 10;
        cfg.split_fraction = 0.5;
        cfg.seed = seed;
        cfg.eval_every = 1000;
        const fc::TrainResult res = fc::train(cfg);

        const fc::GrokMetrics gm = fc::grokking_metrics(res.trace, 0.99);
        double val_max = 0.0;
        for (const fc::TraceRow& row : res.trace.rows)
            val_max = std::max(val_max, row.val_acc);
        const bool seed_ok = gm.step_train >= 0 && gm.step_val >= 0 && gm.delay > 0;
        ok += seed_ok ? 1 : 0;
        failed += seed_ok ? 0 : 1;
        char buf[128];
        std::snprintf(buf, sizeof buf, " seed%llu(train@%lld, val@%lld, val_max %.3f)",
                      static_cast<unsigned long long>(seed),
                      static_cast<long long>(gm.step_train),
                      static_cast<long long>(gm.step_val), val_max);
        detail += buf;
    }
    const double t = seconds_since(t0);
    const bool pass = ok >= 2 && t < 1800.0;
    std::printf(
        "[%s] criterion 8: %d seeds grok (train acc 0.99 strictly before val) "
        "--%s; %.0f s\n",
        pass ? "PASS" : "FAIL", ok, detail.c_str(), t);
    return pass;
}

// ------------------------------------------------------------- criterion 9
// Determinism: rerunning every command with an identical config produces
// byte-identical artifacts. Exercises the installed CLI binary end to end.
bool read_file(const std::filesystem::path& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

bool criterion9() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "fc_acceptance_c9";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base / "a");
    fs::create_directories(base / "b");
    const std::string cli = FC_CLI_PATH;

    auto run = [](const std::string& cmd) { return std::system(cmd.c_str()) == 0; };
    auto q = [](const fs::path& path) { return "\"" + path.string() + "\""; };

    const std::string train_cfg =
        "model = mlp\np = 7\nk = 2\nm = 24\nsteps = 60\nbatch = 16\n"
        "lr = 5e-3\nlambda = 0.005\noptimizer = adamw\nsplit = 0.8\n"
        "seed = 3\neval_every = 20\n";
    const std::string grok_cfg =
        "model = attention\np = 5\nk = 2\nheads = 2\nembed_dim = 8\n"
        "head_dim = 2\ndepth = 1\nsteps = 40\nbatch = 8\nlr = 1e-3\n"
        "optimizer = adamw\nweight_decay = 1e-3\nsplit = 0.5\nseed = 0\n"
        "eval_every = 10\n";
    {
        std::ofstream(base / "train.cfg") << train_cfg;
        std::ofstream(base / "grok.cfg") << grok_cfg;
    }

    bool commands_ok = true;
    for (const std::string side : {"a", "b"}) {
        const fs::path dir = base / side;
        commands_ok = commands_ok &&
            run(cli + " construct --p 7 --k 2 --normalize --out " + q(dir / "net.json") +
                " > /dev/null") &&
            run(cli + " train --config " + q(base / "train.cfg") + " --out " +
                q(dir / "train") + " > /dev/null") &&
            run(cli + " analyze --ckpt " + q(dir / "train" / "checkpoint.json") +
                " --out " + q(dir / "analysis") + " > /dev/null") &&
            run(cli + " verify --p 5 --k 2 > " + q(dir / "verify.txt")) &&
            run(cli + " grok --config " + q(base / "grok.cfg") +
                " --seeds 0,1 --out " + q(dir / "grok") + " > /dev/null");
    }

    const fs::path artifacts[] = {
        "net.json",
        fs::path("train") / "trace.csv",
        fs::path("train") / "config.cfg",
        fs::path("train") / "checkpoint.json",
        fs::path("analysis") / "neuron_spectra.csv",
        fs::path("analysis") / "frequency_census.csv",
        "verify.txt",
        fs::path("grok") / "trace_seed0.csv",
        fs::path("grok") / "trace_seed1.csv",
        fs::path("grok") / "grok_metrics.csv",
    };
    int identical = 0;
    int total = 0;
    std::string first_mismatch;
    for (const fs::path& rel : artifacts) {
        ++total;
        std::string lhs, rhs;
        const bool okes = read_file(base / "a" / rel, lhs) && read_file(base / "b" / rel, rhs);
        if (okes && lhs == rhs) {
            ++identical;
        } else if (first_mismatch.empty()) {
            first_mismatch = rel.string();
        }
    }

    const bool pass = commands_ok && identical == total;
    std::printf(
        "[%s] criterion 9: %d/%d artifacts byte-identical across reruns of "
        "construct/train/analyze/verify/grok%s%s\n",
        pass ? "PASS" : "FAIL", identical, total,
        commands_ok ? "" : " (a command exited nonzero)",
        first_mismatch.empty() ? "" : (" -- first mismatch: " + first_mismatch).c_str());
    fs::remove_all(base, ec);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    using Criterion = bool (*)();
    const Criterion criteria[] = {criterion1, criterion2, criterion3,
                                  criterion4, criterion5, criterion6,
                                  criterion7, criterion8, criterion9};
    if (argc > 2) {
        std::cerr << "usage: fc_acceptance [1-9]\n";
        return 2;
    }
    if (argc == 2) {
        char* end = nullptr;
        const long n = std::strtol(argv[1], &end, 10);
        if (end == argv[1] || *end != '\0' || n < 1 || n > 9) {
            std::cerr << "usage: fc_acceptance [1-9]\n";
            return 2;
        }
        return criteria[n - 1]() ? 0 : 1;
    }
    bool all = true;
    for (const Criterion c : criteria) all = c() && all;
    return all ? 0 : 1;
}
