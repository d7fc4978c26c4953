#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fc {

/// Unnormalized DFT of a real function on Z_p:
///   coeffs[j] = sum_a u(a) e^{-2 pi i j a / p}.
/// Indices are taken mod p, so at(-zeta) == at(p - zeta); Plancherel reads
/// sum_j |coeffs[j]|^2 = p * sum_a u(a)^2.
struct Spectrum {
    int p = 0;
    std::vector<std::complex<double>> coeffs;

    const std::complex<double>& at(int j) const;
};

/// Two-dimensional analogue on Z_p x Z_p, row-major over (j1, j2).
struct Spectrum2D {
    int p = 0;
    std::vector<std::complex<double>> coeffs;

    const std::complex<double>& at(int j1, int j2) const;
};

Spectrum dft1(std::span<const double> u);

/// Inverse transform u(a) = (1/p) sum_j coeffs[j] e^{+2 pi i j a / p}; the
/// imaginary residue of a real-signal spectrum is discarded.
std::vector<double> idft1(const Spectrum& s);

/// m is a p x p real matrix, row-major.
Spectrum2D dft2(std::span<const double> m, int p);
std::vector<double> idft2(const Spectrum2D& s);

/// Folded power at frequency j: |u^(j)|^2 + |u^(-j)|^2 for 0 < j < p,
/// |u^(0)|^2 at DC.
double folded_power(const Spectrum& s, int j);

struct PowerPeak {
    int frequency = 0;            ///< in [1, (p-1)/2]
    double normalized_power = 0;  ///< folded power share of the non-DC total
};

/// The dominant frequency of u and its share of the non-DC spectral mass.
/// DC is excluded (a constant offset carries no class information); ties break
/// toward the smaller frequency. Errors when u has no non-DC mass.
PowerPeak max_normalized_power(std::span<const double> u);

/// One coefficient of the (k+1)-dimensional transform of a scored function on
/// Z_p^k x Z_p:
///   F(j_1..j_k, j_c) = sum_{a, c} eval(a, c) e^{-2 pi i (j_1 a_1 + ... + j_k a_k + j_c c)/p}
/// `indices` holds (j_1, ..., j_k, j_c). Costs p^{k+1} evaluations and is
/// budget-checked.
std::complex<double> network_dft(const std::function<double(std::span<const int>, int)>& eval,
                                 int p, int k, std::span<const int> indices);

/// CSV with header freq,power,normalized_power over frequencies 1..(p-1)/2.
std::string spectrum_csv(std::span<const double> u);

}  // namespace fc
