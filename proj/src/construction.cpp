#include "fc/construction.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fc/budget.hpp"

namespace fc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

void validate_p_k(int p, int k) {
    if (p < 3 || !is_prime(p)) throw std::invalid_argument("p must be an odd prime");
    if (k < 2 || k > 6) throw std::invalid_argument("k must be in [2, 6]");
}

double wrap_angle(double x) {
    // Into (-pi, pi].
    x = std::fmod(x, kTwoPi);
    if (x <= -std::numbers::pi) x += kTwoPi;
    if (x > std::numbers::pi) x -= kTwoPi;
    return x;
}

}  // namespace

double gamma_star(int k, int p) {
    validate_p_k(p, k);
    return 2.0 * factorial(k) /
           (std::pow(2.0 * k + 2.0, (k + 1) / 2.0) * (p - 1) * std::pow(p, (k - 1) / 2.0));
}

double unit_l2_beta(int k, int p) { return std::sqrt(2.0 / ((k + 1.0) * p)); }

NeuronParams cosine_neuron(const CosineNeuronSpec& spec) {
    validate_p_k(spec.p, spec.k);
    if (spec.zeta < 1 || spec.zeta > (spec.p - 1) / 2)
        throw std::invalid_argument("zeta must lie in [1, (p-1)/2]");
    if (spec.u_phases.size() != static_cast<std::size_t>(spec.k))
        throw std::invalid_argument("need one phase per input embedding");

    double phase_sum = -spec.w_phase;
    for (const double ph : spec.u_phases) phase_sum += ph;
    if (std::abs(wrap_angle(phase_sum)) > 1e-9)
        throw std::invalid_argument("cosine unit phases must satisfy sum(u_phases) == w_phase (mod 2 pi)");

    NeuronParams n;
    n.u.resize(static_cast<std::size_t>(spec.k));
    const double step = kTwoPi * spec.zeta / spec.p;
    for (int j = 0; j < spec.k; ++j) {
        auto& uj = n.u[static_cast<std::size_t>(j)];
        uj.resize(static_cast<std::size_t>(spec.p));
        for (int a = 0; a < spec.p; ++a)
            uj[static_cast<std::size_t>(a)] =
                spec.beta * std::cos(spec.u_phases[static_cast<std::size_t>(j)] + step * a);
    }
    n.w.resize(static_cast<std::size_t>(spec.p));
    for (int c = 0; c < spec.p; ++c)
        n.w[static_cast<std::size_t>(c)] = spec.beta * std::cos(spec.w_phase + step * c);
    return n;
}

std::vector<SignedTerm> sum_to_product_terms(int k) {
    if (k < 1 || k > 20) throw std::invalid_argument("sum_to_product_terms: k out of range");
    std::vector<SignedTerm> terms;
    terms.reserve(1ull << (k - 1));
    for (std::uint64_t bits = 0; bits < (1ull << (k - 1)); ++bits) {
        SignedTerm t;
        t.signs.resize(static_cast<std::size_t>(k), 1);
        int negatives = 0;
        for (int j = 1; j < k; ++j)
            if (bits & (1ull << (j - 1))) {
                t.signs[static_cast<std::size_t>(j)] = -1;
                ++negatives;
            }
        t.coefficient = (negatives % 2 == 0) ? 1 : -1;  // (-1)^{(k - sum s)/2} = (-1)^{#neg}
        terms.push_back(std::move(t));
    }
    return terms;
}

std::vector<TrigTerm> cos_sum_expansion(int k) {
    if (k < 1 || k > 20) throw std::invalid_argument("cos_sum_expansion: k out of range");
    std::vector<TrigTerm> terms;
    terms.reserve(1ull << k);
    for (std::uint64_t bits = 0; bits < (1ull << (k + 1)); ++bits) {
        int sines = 0;
        for (int i = 0; i <= k; ++i)
            if (bits & (1ull << i)) ++sines;
        if (sines % 2 != 0) continue;  // odd sine-count terms cancel
        TrigTerm t;
        t.b.resize(static_cast<std::size_t>(k) + 1, 0);
        for (int i = 0; i <= k; ++i)
            if (bits & (1ull << i)) t.b[static_cast<std::size_t>(i)] = 1;
        t.sign = (sines % 4 == 2) ? -1 : 1;
        terms.push_back(std::move(t));
    }
    return terms;
}

MlpParams construct_max_margin(int p, int k) {
    validate_p_k(p, k);
    const std::uint64_t per_freq = 1ull << (2 * k - 1);
    require_budget(per_freq * ((static_cast<std::uint64_t>(p) - 1) / 2) *
                       static_cast<std::uint64_t>(p) * (k + 1),
                   "construct_max_margin parameter table");

    // Equal amplitudes across a unit's k+1 vectors minimize its L2 length for
    // the function it computes, and this beta makes each frequency's block sum
    // exactly to cos(2 pi zeta (sum a - c) / p).
    const double beta = std::pow(std::pow(2.0, k - 1) * factorial(k), -1.0 / (k + 1));

    const std::vector<TrigTerm> trig = cos_sum_expansion(k);
    const std::vector<SignedTerm> reps = sum_to_product_terms(k);

    MlpParams net;
    net.p = p;
    net.k = k;
    net.neurons.reserve(per_freq * ((static_cast<std::uint64_t>(p) - 1) / 2));

    for (int zeta = 1; zeta <= (p - 1) / 2; ++zeta) {
        for (const TrigTerm& t : trig) {
            // The term's factors become phase offsets: cos contributes 0,
            // sin contributes -pi/2 on an input slot and +pi/2 on the output
            // slot (its argument enters negated there). A negative term sign
            // is a +pi shift folded into the output phase; because only even
            // sine counts survive, the fold lands exactly where the phase-sum
            // constraint needs it.
            std::vector<double> base_u(static_cast<std::size_t>(k), 0.0);
            for (int j = 0; j < k; ++j)
                if (t.b[static_cast<std::size_t>(j)] == 1)
                    base_u[static_cast<std::size_t>(j)] = -std::numbers::pi / 2.0;
            double base_w = (t.b[static_cast<std::size_t>(k)] == 1) ? std::numbers::pi / 2.0 : 0.0;
            if (t.sign < 0) base_w += std::numbers::pi;

            for (const SignedTerm& rep : reps) {
                CosineNeuronSpec spec;
                spec.p = p;
                spec.k = k;
                spec.zeta = zeta;
                spec.beta = beta;
                spec.u_phases = base_u;
                spec.w_phase = base_w;
                // A -1 entry in the sign pattern negates one embedding; the
                // pattern's coefficient sign rides on the output vector. Both
                // are +pi phase shifts, and they arrive in pairs, so the
                // alignment constraint survives.
                for (int j = 0; j < k; ++j)
                    if (rep.signs[static_cast<std::size_t>(j)] < 0)
                        spec.u_phases[static_cast<std::size_t>(j)] += std::numbers::pi;
                if (rep.coefficient < 0) spec.w_phase += std::numbers::pi;
                net.neurons.push_back(cosine_neuron(spec));
            }
        }
    }
    return net;
}

MlpParams normalize_network(const MlpParams& net) {
    const double norm = l2k1_norm(net);
    if (!(norm > 0.0)) throw std::invalid_argument("normalize_network: zero network");
    MlpParams out = net;
    const double scale = 1.0 / norm;
    for (NeuronParams& n : out.neurons) {
        for (auto& uj : n.u)
            for (double& v : uj) v *= scale;
        for (double& v : n.w) v *= scale;
    }
    return out;
}

IndicatorReport deviation_from_pattern(const MlpParams& net, double correct_level,
                                       double wrong_level) {
    const int p = net.p;
    const int k = net.k;
    validate_p_k(p, k);
    require_budget(checked_pow(static_cast<std::uint64_t>(p), k + 1),
                   "exhaustive indicator check over Z_p^{k+1}");

    IndicatorReport report;
    report.correct_level = correct_level;
    report.wrong_level = wrong_level;
    report.worst_inputs.assign(static_cast<std::size_t>(k), 0);

    const std::uint64_t rows = checked_pow(static_cast<std::uint64_t>(p), k);
    std::vector<int> a(static_cast<std::size_t>(k), 0);
    int sum_mod = 0;
    for (std::uint64_t row = 0; row < rows; ++row) {
        const std::vector<double> f = forward_mlp(net, a);
        for (int c = 0; c < p; ++c) {
            const double want = (c == sum_mod) ? correct_level : wrong_level;
            const double dev = std::abs(f[static_cast<std::size_t>(c)] - want);
            if (dev > report.max_deviation) {
                report.max_deviation = dev;
                report.worst_inputs.assign(a.begin(), a.end());
                report.worst_class = c;
            }
        }
        for (int j = k - 1; j >= 0; --j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (++a[js] < p) {
                sum_mod = (sum_mod + 1) % p;
                break;
            }
            a[js] = 0;
            sum_mod = (sum_mod + 1) % p;
        }
    }
    return report;
}

IndicatorReport verify_indicator(const MlpParams& net) {
    return deviation_from_pattern(net, (net.p - 1) / 2.0, -0.5);
}

PowerPeak neuron_power_peak(const NeuronParams& n) {
    const int p = n.p();
    if (p < 3) throw std::invalid_argument("neuron_power_peak: malformed unit");
    std::vector<double> folded(static_cast<std::size_t>((p - 1) / 2) + 1, 0.0);
    double total = 0.0;
    auto accumulate = [&](const std::vector<double>& v) {
        const Spectrum s = dft1(v);
        for (int j = 1; j <= (p - 1) / 2; ++j) folded[static_cast<std::size_t>(j)] += folded_power(s, j);
        for (int j = 1; j < p; ++j) total += std::norm(s.at(j));
    };
    for (const auto& uj : n.u) accumulate(uj);
    accumulate(n.w);
    if (!(total > 0.0))
        throw std::invalid_argument("neuron_power_peak: unit has no non-DC spectral mass");

    PowerPeak best;
    for (int j = 1; j <= (p - 1) / 2; ++j) {
        const double share = folded[static_cast<std::size_t>(j)] / total;
        if (share > best.normalized_power) {
            best.normalized_power = share;
            best.frequency = j;
        }
    }
    return best;
}

std::vector<int> per_frequency_counts(const MlpParams& net) {
    std::vector<int> counts(static_cast<std::size_t>((net.p - 1) / 2), 0);
    for (const NeuronParams& n : net.neurons)
        ++counts[static_cast<std::size_t>(neuron_power_peak(n).frequency - 1)];
    return counts;
}

double phase_residual(const NeuronParams& n, int zeta) {
    const int p = n.p();
    if (zeta < 1 || zeta > (p - 1) / 2) throw std::invalid_argument("phase_residual: bad zeta");
    double sum = 0.0;
    for (const auto& uj : n.u) sum += std::arg(dft1(uj).at(zeta));
    const double w_phase = std::arg(dft1(n.w).at(zeta));
    return std::abs(wrap_angle(sum - w_phase));
}

std::function<double(std::span<const int>, int)> make_network_evaluator(const MlpParams& net) {
    struct State {
        MlpParams net;
        std::vector<int> cached_a;
        std::vector<double> scores;
    };
    auto state = std::make_shared<State>();
    state->net = net;
    return [state](std::span<const int> a, int c) -> double {
        if (state->cached_a.size() != a.size() ||
            !std::equal(a.begin(), a.end(), state->cached_a.begin())) {
            state->cached_a.assign(a.begin(), a.end());
            state->scores = forward_mlp(state->net, a);
        }
        return state->scores[static_cast<std::size_t>(c)];
    };
}

}  // namespace fc
