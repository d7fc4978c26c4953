#include "fc/fourier.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fc/budget.hpp"

namespace fc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int mod_p(int j, int p) {
    int r = j % p;
    return r < 0 ? r + p : r;
}

/// e^{-2 pi i t / p} for t = 0..p-1.
std::vector<std::complex<double>> root_table(int p) {
    std::vector<std::complex<double>> w(static_cast<std::size_t>(p));
    for (int t = 0; t < p; ++t) {
        const double ang = -kTwoPi * t / p;
        w[static_cast<std::size_t>(t)] = {std::cos(ang), std::sin(ang)};
    }
    return w;
}

}  // namespace

const std::complex<double>& Spectrum::at(int j) const {
    return coeffs[static_cast<std::size_t>(mod_p(j, p))];
}

const std::complex<double>& Spectrum2D::at(int j1, int j2) const {
    return coeffs[static_cast<std::size_t>(mod_p(j1, p)) * static_cast<std::size_t>(p) +
                  static_cast<std::size_t>(mod_p(j2, p))];
}

Spectrum dft1(std::span<const double> u) {
    const int p = static_cast<int>(u.size());
    if (p == 0) throw std::invalid_argument("dft1: empty input");
    const auto w = root_table(p);
    Spectrum s;
    s.p = p;
    s.coeffs.resize(u.size());
    for (int j = 0; j < p; ++j) {
        std::complex<double> acc = 0.0;
        for (int a = 0; a < p; ++a)
            acc += u[static_cast<std::size_t>(a)] *
                   w[static_cast<std::size_t>((static_cast<long long>(j) * a) % p)];
        s.coeffs[static_cast<std::size_t>(j)] = acc;
    }
    return s;
}

std::vector<double> idft1(const Spectrum& s) {
    const int p = s.p;
    if (p == 0 || s.coeffs.size() != static_cast<std::size_t>(p))
        throw std::invalid_argument("idft1: malformed spectrum");
    const auto w = root_table(p);  // conjugate gives the +i kernel
    std::vector<double> u(static_cast<std::size_t>(p));
    for (int a = 0; a < p; ++a) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < p; ++j)
            acc += s.coeffs[static_cast<std::size_t>(j)] *
                   std::conj(w[static_cast<std::size_t>((static_cast<long long>(j) * a) % p)]);
        u[static_cast<std::size_t>(a)] = acc.real() / p;
    }
    return u;
}

Spectrum2D dft2(std::span<const double> m, int p) {
    if (p <= 0 || m.size() != static_cast<std::size_t>(p) * static_cast<std::size_t>(p))
        throw std::invalid_argument("dft2: expected a p x p matrix");
    const auto w = root_table(p);
    Spectrum2D s;
    s.p = p;
    s.coeffs.resize(m.size());
    for (int j1 = 0; j1 < p; ++j1)
        for (int j2 = 0; j2 < p; ++j2) {
            std::complex<double> acc = 0.0;
            for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b) {
                    const int t = static_cast<int>((static_cast<long long>(j1) * a +
                                                    static_cast<long long>(j2) * b) % p);
                    acc += m[static_cast<std::size_t>(a) * p + static_cast<std::size_t>(b)] *
                           w[static_cast<std::size_t>(t)];
                }
            s.coeffs[static_cast<std::size_t>(j1) * p + static_cast<std::size_t>(j2)] = acc;
        }
    return s;
}

std::vector<double> idft2(const Spectrum2D& s) {
    const int p = s.p;
    if (p <= 0 || s.coeffs.size() != static_cast<std::size_t>(p) * static_cast<std::size_t>(p))
        throw std::invalid_argument("idft2: malformed spectrum");
    const auto w = root_table(p);
    std::vector<double> m(s.coeffs.size());
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            std::complex<double> acc = 0.0;
            for (int j1 = 0; j1 < p; ++j1)
                for (int j2 = 0; j2 < p; ++j2) {
                    const int t = static_cast<int>((static_cast<long long>(j1) * a +
                                                    static_cast<long long>(j2) * b) % p);
                    acc += s.coeffs[static_cast<std::size_t>(j1) * p +
                                    static_cast<std::size_t>(j2)] *
                           std::conj(w[static_cast<std::size_t>(t)]);
                }
            m[static_cast<std::size_t>(a) * p + static_cast<std::size_t>(b)] =
                acc.real() / (static_cast<double>(p) * p);
        }
    return m;
}

double folded_power(const Spectrum& s, int j) {
    const int jm = mod_p(j, s.p);
    if (jm == 0) return std::norm(s.at(0));
    return std::norm(s.at(jm)) + std::norm(s.at(s.p - jm));
}

PowerPeak max_normalized_power(std::span<const double> u) {
    const int p = static_cast<int>(u.size());
    if (p < 3) throw std::invalid_argument("max_normalized_power: need p >= 3");
    const Spectrum s = dft1(u);

    double total = 0.0;
    for (int j = 1; j < p; ++j) total += std::norm(s.at(j));
    double with_dc = total + std::norm(s.at(0));
    if (!(total > 1e-24 * std::max(1.0, with_dc)))
        throw std::invalid_argument("max_normalized_power: no non-DC spectral mass");

    PowerPeak best;
    for (int j = 1; j <= (p - 1) / 2; ++j) {
        const double share = folded_power(s, j) / total;
        if (share > best.normalized_power) {
            best.normalized_power = share;
            best.frequency = j;
        }
    }
    return best;
}

std::complex<double> network_dft(const std::function<double(std::span<const int>, int)>& eval,
                                 int p, int k, std::span<const int> indices) {
    if (p < 3 || k < 1) throw std::invalid_argument("network_dft: need p >= 3, k >= 1");
    if (indices.size() != static_cast<std::size_t>(k) + 1)
        throw std::invalid_argument("network_dft: expected k+1 frequency indices");
    require_budget(checked_pow(static_cast<std::uint64_t>(p), k + 1), "network_dft over Z_p^{k+1}");

    const auto w = root_table(p);
    std::vector<int> a(static_cast<std::size_t>(k), 0);
    std::complex<double> acc = 0.0;

    // Odometer over Z_p^k; `phase` tracks (j_1 a_1 + ... + j_k a_k) mod p.
    const std::uint64_t rows = checked_pow(static_cast<std::uint64_t>(p), k);
    int phase = 0;
    const int jc = mod_p(indices[static_cast<std::size_t>(k)], p);
    for (std::uint64_t row = 0; row < rows; ++row) {
        for (int c = 0; c < p; ++c) {
            const int t = static_cast<int>((phase + static_cast<long long>(jc) * c) % p);
            acc += eval(a, c) * w[static_cast<std::size_t>(t)];
        }
        for (int j = k - 1; j >= 0; --j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (++a[js] < p) {
                phase = mod_p(phase + indices[js], p);
                break;
            }
            a[js] = 0;
            phase = mod_p(phase - indices[js] * (p - 1), p);
        }
    }
    return acc;
}

std::string spectrum_csv(std::span<const double> u) {
    const int p = static_cast<int>(u.size());
    const Spectrum s = dft1(u);
    double total = 0.0;
    for (int j = 1; j < p; ++j) total += std::norm(s.at(j));

    std::string out = "freq,power,normalized_power\n";
    char buf[64];
    for (int j = 1; j <= (p - 1) / 2; ++j) {
        const double power = folded_power(s, j);
        const double share = total > 0.0 ? power / total : 0.0;
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", j, power, share);
        out += buf;
    }
    return out;
}

}  // namespace fc
