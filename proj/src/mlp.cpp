#include "fc/mlp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fc/budget.hpp"

namespace fc {

namespace {

void validate_net(const MlpParams& net) {
    if (net.p < 3 || net.k < 1) throw std::invalid_argument("MlpParams: need p >= 3, k >= 1");
    for (const NeuronParams& n : net.neurons) {
        if (n.k() != net.k || n.p() != net.p)
            throw std::invalid_argument("MlpParams: neuron shape mismatch");
        for (const auto& uj : n.u)
            if (static_cast<int>(uj.size()) != net.p)
                throw std::invalid_argument("MlpParams: embedding length mismatch");
    }
}

void validate_point(const MlpParams& net, std::span<const int> a) {
    if (a.size() != static_cast<std::size_t>(net.k))
        throw std::invalid_argument("input tuple must have k entries");
    for (const int ai : a)
        if (ai < 0 || ai >= net.p) throw std::out_of_range("input entry outside Z_p");
}

double int_pow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace

std::vector<double> forward_mlp(const MlpParams& net, std::span<const int> a) {
    validate_net(net);
    validate_point(net, a);
    std::vector<double> out(static_cast<std::size_t>(net.p), 0.0);
    for (const NeuronParams& n : net.neurons) {
        double s = 0.0;
        for (int j = 0; j < net.k; ++j)
            s += n.u[static_cast<std::size_t>(j)][static_cast<std::size_t>(a[static_cast<std::size_t>(j)])];
        const double act = int_pow(s, net.k);
        for (int c = 0; c < net.p; ++c) out[static_cast<std::size_t>(c)] += act * n.w[static_cast<std::size_t>(c)];
    }
    return out;
}

double neuron_l2(const NeuronParams& n) {
    double sq = 0.0;
    for (const auto& uj : n.u)
        for (const double v : uj) sq += v * v;
    for (const double v : n.w) sq += v * v;
    return std::sqrt(sq);
}

double l2k1_norm(const MlpParams& net) {
    validate_net(net);
    const int q = net.k + 1;
    double acc = 0.0;
    for (const NeuronParams& n : net.neurons) acc += int_pow(neuron_l2(n), q);
    return std::pow(acc, 1.0 / q);
}

double margin_g(const MlpParams& net, std::span<const int> a, int y) {
    if (y < 0 || y >= net.p) throw std::out_of_range("label outside Z_p");
    const std::vector<double> f = forward_mlp(net, a);
    double best_wrong = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < net.p; ++c)
        if (c != y) best_wrong = std::max(best_wrong, f[static_cast<std::size_t>(c)]);
    return f[static_cast<std::size_t>(y)] - best_wrong;
}

ClassWeighting ClassWeighting::uniform(int p) {
    if (p < 2) throw std::invalid_argument("ClassWeighting: need p >= 2");
    ClassWeighting w;
    w.p = p;
    w.tau.assign(static_cast<std::size_t>(p), 1.0 / (p - 1));
    return w;
}

double class_weighted_margin_gprime(const MlpParams& net, std::span<const int> a, int y,
                                    const ClassWeighting& weights) {
    if (weights.p != net.p || weights.tau.size() != static_cast<std::size_t>(net.p))
        throw std::invalid_argument("class weighting built for a different p");
    if (y < 0 || y >= net.p) throw std::out_of_range("label outside Z_p");
    const std::vector<double> f = forward_mlp(net, a);
    double weighted_wrong = 0.0;
    for (int c = 0; c < net.p; ++c)
        if (c != y) weighted_wrong += weights.tau[static_cast<std::size_t>(c)] * f[static_cast<std::size_t>(c)];
    return f[static_cast<std::size_t>(y)] - weighted_wrong;
}

MarginReport dataset_margin_h(const MlpParams& net, const ModAddDataset& ds, bool keep_per_point) {
    validate_net(net);
    if (ds.size() == 0) throw std::invalid_argument("dataset_margin_h: empty dataset");
    if (ds.p != net.p || ds.k != net.k)
        throw std::invalid_argument("dataset and network disagree on (p, k)");

    MarginReport report;
    report.min_margin = std::numeric_limits<double>::infinity();
    if (keep_per_point) report.per_point.emplace();

    std::vector<int> a(static_cast<std::size_t>(net.k));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto r = ds.row(i);
        for (int j = 0; j < net.k; ++j) a[static_cast<std::size_t>(j)] = r[static_cast<std::size_t>(j)];
        const double g = margin_g(net, a, ds.labels[i]);
        report.min_margin = std::min(report.min_margin, g);
        if (keep_per_point) report.per_point->push_back(g);
    }
    report.norm = l2k1_norm(net);
    report.normalized_margin = report.min_margin / int_pow(report.norm, net.k + 1);
    return report;
}

double single_neuron_eta(const NeuronParams& n, int delta) {
    const int p = n.p();
    const int k = n.k();
    if (p < 3 || k < 1) throw std::invalid_argument("single_neuron_eta: malformed unit");
    const std::uint64_t rows = checked_pow(static_cast<std::uint64_t>(p), k);
    require_budget(rows, "single_neuron_eta over Z_p^k");

    const int d = ((delta % p) + p) % p;
    std::vector<int> a(static_cast<std::size_t>(k), 0);
    int sum_mod = 0;
    double acc = 0.0;
    for (std::uint64_t row = 0; row < rows; ++row) {
        double s = 0.0;
        for (int j = 0; j < k; ++j)
            s += n.u[static_cast<std::size_t>(j)][static_cast<std::size_t>(a[static_cast<std::size_t>(j)])];
        const int c = (sum_mod - d + p) % p;
        acc += int_pow(s, k) * n.w[static_cast<std::size_t>(c)];
        for (int j = k - 1; j >= 0; --j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (++a[js] < p) {
                sum_mod = (sum_mod + 1) % p;
                break;
            }
            a[js] = 0;
            sum_mod = (sum_mod - (p - 1) % p + p) % p;
        }
    }
    return acc / static_cast<double>(rows);
}

double neuron_weighted_objective(const NeuronParams& n) {
    const int p = n.p();
    double wrong = 0.0;
    for (int d = 1; d < p; ++d) wrong += single_neuron_eta(n, d);
    return single_neuron_eta(n, 0) - wrong / (p - 1);
}

}  // namespace fc
