#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fc/dataset.hpp"

namespace fc {

/// One hidden unit of the degree-k polynomial network. The unit holds k input
/// embedding vectors u_1..u_k in R^p plus an output vector w in R^p and
/// contributes (u_1(a_1) + ... + u_k(a_k))^k * w to the class scores.
struct NeuronParams {
    std::vector<std::vector<double>> u;  ///< k vectors, each of length p
    std::vector<double> w;               ///< length p

    int p() const { return static_cast<int>(w.size()); }
    int k() const { return static_cast<int>(u.size()); }
};

struct MlpParams {
    int p = 0;
    int k = 0;
    std::vector<NeuronParams> neurons;

    int m() const { return static_cast<int>(neurons.size()); }
};

/// Class scores f(a) in R^p, summed over hidden units.
std::vector<double> forward_mlp(const MlpParams& net, std::span<const int> a);

/// Euclidean length of one unit's full parameter vector,
/// sqrt(|u_1|^2 + ... + |u_k|^2 + |w|^2).
double neuron_l2(const NeuronParams& n);

/// The homogeneity-matched norm (sum_i neuron_l2(i)^{k+1})^{1/(k+1)}.
double l2k1_norm(const MlpParams& net);

/// Margin of one labelled point: f(a)[y] - max_{c != y} f(a)[c].
double margin_g(const MlpParams& net, std::span<const int> a, int y);

/// Weights over wrong classes; uniform() gives tau[c] = 1/(p-1).
struct ClassWeighting {
    int p = 0;
    std::vector<double> tau;  ///< length p; the entry at the true class is ignored

    static ClassWeighting uniform(int p);
};

/// Weighted margin g' = f(a)[y] - sum_{c != y} tau[c] f(a)[c].
double class_weighted_margin_gprime(const MlpParams& net, std::span<const int> a, int y,
                                    const ClassWeighting& weights);

struct MarginReport {
    double min_margin = 0;         ///< h = min over the dataset of margin_g
    double norm = 0;               ///< l2k1_norm at the evaluated parameters
    double normalized_margin = 0;  ///< min_margin / norm^{k+1}
    std::optional<std::vector<double>> per_point;
};

/// Dataset margin h plus the scale-invariant normalized margin
/// h(theta / |theta|) = min_margin / |theta|^{k+1}.
MarginReport dataset_margin_h(const MlpParams& net, const ModAddDataset& ds,
                              bool keep_per_point = false);

/// Correlation of one unit with the shifted addition structure:
///   eta(delta) = E_{a in Z_p^k} [ (u_1(a_1)+...+u_k(a_k))^k * w((a_1+...+a_k - delta) mod p) ].
/// Brute-force expectation over all p^k tuples, budget-checked.
double single_neuron_eta(const NeuronParams& n, int delta);

/// eta(0) - (1/(p-1)) * sum_{delta != 0} eta(delta): the class-weighted margin
/// contribution of a single unit. Maximized (over the unit L2 ball) at
/// gamma_star(k, p) by single-frequency cosine units.
double neuron_weighted_objective(const NeuronParams& n);

}  // namespace fc
