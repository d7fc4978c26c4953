#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fc {

/// Labelled tuples for k-token modular addition: each row is (a_1, ..., a_k)
/// with label (a_1 + ... + a_k) mod p. Rows are stored flat and row-major so
/// iteration stays cache-friendly at p^k scale.
struct ModAddDataset {
    int p = 0;
    int k = 0;
    std::vector<std::int32_t> inputs;  ///< size() * k, row-major
    std::vector<std::int32_t> labels;  ///< one label per row

    std::size_t size() const { return labels.size(); }

    std::span<const std::int32_t> row(std::size_t i) const {
        return {inputs.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
    }
};

/// How to carve a dataset into train/validation halves.
struct SplitSpec {
    double train_fraction = 1.0;  ///< in [0, 1]
    std::uint64_t seed = 0;
};

bool is_prime(int n);

/// Every tuple in Z_p^k, lexicographic (a_1 outermost). Requires p an odd
/// prime, 2 <= k <= 6, and p^k within the enumeration budget.
ModAddDataset generate_full(int p, int k);

/// n tuples drawn uniformly with replacement (seeded); the escape hatch when
/// p^k is beyond the enumeration budget.
ModAddDataset generate_sampled(int p, int k, std::size_t n, std::uint64_t seed);

/// Deterministic split. |train| = round(train_fraction * n), rounding half up.
/// Membership comes from a seeded shuffle ("splitmix64-v1"), but both halves
/// preserve the parent's row order so downstream iteration stays canonical.
std::pair<ModAddDataset, ModAddDataset> split(const ModAddDataset& ds, const SplitSpec& spec);

/// Standard basis vector e_a in R^p.
std::vector<double> one_hot(int a, int p);

/// CSV with header a_1,...,a_k,label.
std::string dataset_csv(const ModAddDataset& ds);
void export_csv(const ModAddDataset& ds, const std::string& path);

}  // namespace fc
