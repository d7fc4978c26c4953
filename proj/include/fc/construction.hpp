#pragma once

#include <vector>

#include "fc/fourier.hpp"
#include "fc/mlp.hpp"

namespace fc {

/// The optimal normalized margin for k-token addition mod p:
///   gamma* = 2 k! / ((2k+2)^{(k+1)/2} (p-1) p^{(k-1)/2}).
double gamma_star(int k, int p);

/// Blueprint for a single-frequency cosine unit:
///   u_j(a) = beta * cos(u_phases[j] + 2 pi zeta a / p)
///   w(c)   = beta * cos(w_phase    + 2 pi zeta c / p)
/// subject to u_phases summing to w_phase (mod 2 pi) — the alignment that
/// makes the unit's activation track cos(2 pi zeta (sum a_j - c) / p).
struct CosineNeuronSpec {
    int p = 0;
    int k = 0;
    int zeta = 1;  ///< in [1, (p-1)/2]
    std::vector<double> u_phases;
    double w_phase = 0.0;
    double beta = 1.0;
};

/// Amplitude that puts the whole unit on the L2 unit sphere:
/// sqrt(2 / ((k+1) p)).
double unit_l2_beta(int k, int p);

/// Materialize a cosine unit; validates the phase-sum constraint.
NeuronParams cosine_neuron(const CosineNeuronSpec& spec);

/// One summand of the power-sum identity
///   2^{k-1} k! d_1 ... d_k = sum_{s: s_1 = +1} coeff(s) (s_1 d_1 + ... + s_k d_k)^k,
/// coeff(s) = (-1)^{(k - sum_j s_j)/2}. Only representatives with s_1 = +1 are
/// emitted: s and -s contribute identical terms (degree k and coefficient
/// parity cancel the global sign), so half the sign patterns already close the
/// identity.
struct SignedTerm {
    std::vector<int> signs;  ///< k entries, each +1 or -1, signs[0] == +1
    int coefficient = 1;     ///< +1 or -1
};
std::vector<SignedTerm> sum_to_product_terms(int k);

/// One summand of the angle-addition expansion of cos(x_1 + ... + x_{k+1}):
/// factor i is sin(x_i) where b[i] = 1 and cos(x_i) where b[i] = 0. Terms with
/// an odd sine count cancel; the sign is -1 exactly when sum(b) % 4 == 2.
struct TrigTerm {
    std::vector<int> b;  ///< k+1 entries in {0, 1}
    int sign = 1;
};
std::vector<TrigTerm> cos_sum_expansion(int k);

/// The closed-form maximum-margin network: 2^{2k-1} cosine units per
/// frequency, (p-1)/2 frequencies, every unit with the canonical amplitude
/// (2^{k-1} k!)^{-1/(k+1)}. The network computes exactly
///   f(a)[c] = sum_{zeta=1}^{(p-1)/2} cos(2 pi zeta (a_1 + ... + a_k - c) / p),
/// which is (p-1)/2 when c is the correct sum and -1/2 on every other class:
/// over half the nonzero frequencies the cosine sum at a nonzero argument is
/// exactly -1/2, never zero.
MlpParams construct_max_margin(int p, int k);

/// Rescale all units by one common factor so l2k1_norm == 1. The function the
/// network computes shrinks by the (k+1)-th power of that factor; margins and
/// the normalized margin are preserved by homogeneity.
MlpParams normalize_network(const MlpParams& net);

struct IndicatorReport {
    double correct_level = 0;  ///< expected score on the true class
    double wrong_level = 0;    ///< expected score on every other class
    double max_deviation = 0;  ///< worst |f(a)[c] - expected| over all p^{k+1} pairs
    std::vector<int> worst_inputs;
    int worst_class = 0;
};

/// Exhaustive comparison of the network against an arbitrary two-level target
/// pattern. Budget-checked (p^{k+1} forward evaluations).
IndicatorReport deviation_from_pattern(const MlpParams& net, double correct_level,
                                       double wrong_level);

/// deviation_from_pattern against the levels the cosine construction attains:
/// (p-1)/2 on the correct class, -1/2 elsewhere.
IndicatorReport verify_indicator(const MlpParams& net);

/// Folded power of one unit summed over its k+1 weight vectors, reduced to the
/// dominant frequency and its share of the unit's non-DC mass.
PowerPeak neuron_power_peak(const NeuronParams& n);

/// Census of dominant frequencies: counts[zeta - 1] units attributed to each
/// zeta in [1, (p-1)/2].
std::vector<int> per_frequency_counts(const MlpParams& net);

/// |sum_j arg u^_j(zeta) - arg w^(zeta)| wrapped to [0, pi]: zero exactly when
/// the unit's phases satisfy the alignment constraint at frequency zeta.
double phase_residual(const NeuronParams& n, int zeta);

/// Memoizing adapter for network_dft: caches one forward pass per input tuple
/// (the transform sweeps the class index innermost, so this removes a factor
/// of p). The network is copied into the closure.
std::function<double(std::span<const int>, int)> make_network_evaluator(const MlpParams& net);

}  // namespace fc
