#include "fc/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fc/budget.hpp"
#include "fc/prng.hpp"

namespace fc {

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; static_cast<long long>(d) * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

namespace {

void validate_p_k(int p, int k) {
    if (p < 3 || p % 2 == 0 || !is_prime(p))
        throw std::invalid_argument("p must be an odd prime, got " + std::to_string(p));
    if (k < 2 || k > 6)
        throw std::invalid_argument("k must be in [2, 6], got " + std::to_string(k));
}

}  // namespace

ModAddDataset generate_full(int p, int k) {
    validate_p_k(p, k);
    const std::uint64_t n = checked_pow(static_cast<std::uint64_t>(p), k);
    require_budget(n, "full enumeration of Z_p^k (use generate_sampled instead)");

    ModAddDataset ds;
    ds.p = p;
    ds.k = k;
    ds.inputs.reserve(n * static_cast<std::uint64_t>(k));
    ds.labels.reserve(n);

    std::vector<std::int32_t> a(static_cast<std::size_t>(k), 0);
    int sum = 0;
    for (std::uint64_t row = 0; row < n; ++row) {
        ds.inputs.insert(ds.inputs.end(), a.begin(), a.end());
        ds.labels.push_back(static_cast<std::int32_t>(sum % p));
        // Odometer increment on the last coordinate keeps rows lexicographic.
        for (int j = k - 1; j >= 0; --j) {
            if (++a[j] < p) {
                ++sum;
                break;
            }
            a[j] = 0;
            sum -= p - 1;
        }
    }
    return ds;
}

ModAddDataset generate_sampled(int p, int k, std::size_t n, std::uint64_t seed) {
    validate_p_k(p, k);
    if (n == 0) throw std::invalid_argument("sampled dataset needs at least one row");

    SplitMix64 rng(seed);
    ModAddDataset ds;
    ds.p = p;
    ds.k = k;
    ds.inputs.reserve(n * static_cast<std::size_t>(k));
    ds.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        int sum = 0;
        for (int j = 0; j < k; ++j) {
            const auto a = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(p)));
            ds.inputs.push_back(a);
            sum += a;
        }
        ds.labels.push_back(static_cast<std::int32_t>(sum % p));
    }
    return ds;
}

std::pair<ModAddDataset, ModAddDataset> split(const ModAddDataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction >= 0.0 && spec.train_fraction <= 1.0))
        throw std::invalid_argument("train_fraction must lie in [0, 1]");
    if (ds.size() == 0) throw std::invalid_argument("cannot split an empty dataset");

    const std::size_t n = ds.size();
    const auto n_train =
        static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n) + 0.5));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(spec.seed);
    rng.shuffle(std::span<std::size_t>(order));

    std::vector<char> in_train(n, 0);
    for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;

    ModAddDataset train, val;
    train.p = val.p = ds.p;
    train.k = val.k = ds.k;
    for (std::size_t i = 0; i < n; ++i) {
        ModAddDataset& dst = in_train[i] ? train : val;
        const auto r = ds.row(i);
        dst.inputs.insert(dst.inputs.end(), r.begin(), r.end());
        dst.labels.push_back(ds.labels[i]);
    }
    return {std::move(train), std::move(val)};
}

std::vector<double> one_hot(int a, int p) {
    if (a < 0 || a >= p) throw std::out_of_range("one_hot: value outside Z_p");
    std::vector<double> e(static_cast<std::size_t>(p), 0.0);
    e[static_cast<std::size_t>(a)] = 1.0;
    return e;
}

std::string dataset_csv(const ModAddDataset& ds) {
    std::ostringstream out;
    for (int j = 1; j <= ds.k; ++j) out << 'a' << '_' << j << ',';
    out << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto r = ds.row(i);
        for (int j = 0; j < ds.k; ++j) out << r[static_cast<std::size_t>(j)] << ',';
        out << ds.labels[i] << '\n';
    }
    return out.str();
}

void export_csv(const ModAddDataset& ds, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << dataset_csv(ds);
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace fc
