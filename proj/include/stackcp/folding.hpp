#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "stackcp/errors.hpp"
#include "stackcp/rng.hpp"

namespace stackcp {

// Random near-even partition of n units into K folds. Only the per-unit fold
// label is stored; fold membership and fold-exclusion index sets are all the
// rest of the library ever asks of it. Units and fold ids are 0-based.
class FoldScheme {
public:
    static FoldScheme sample(std::size_t n, std::size_t k, std::uint64_t seed) {
        if (k < 2 || k > n) throw BadFoldCount("sample_fold_scheme: need 2 <= K <= n");
        // Deal a shuffled deck round-robin: fold sizes differ by at most one,
        // and every near-even partition is equally likely.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_stream(seed, "fold-scheme"));
        rng.shuffle(order);
        std::vector<std::size_t> labels(n);
        for (std::size_t pos = 0; pos < n; ++pos) labels[order[pos]] = pos % k;
        return FoldScheme(n, k, std::move(labels), seed);
    }

    // Wrap an existing assignment (used e.g. when restricting a scheme to a
    // subset of its units). Validates the partition invariants.
    static FoldScheme from_assignment(std::vector<std::size_t> labels, std::size_t k,
                                      std::uint64_t seed = 0) {
        const std::size_t n = labels.size();
        if (k < 2 || k > n) throw BadFoldCount("from_assignment: need 2 <= K <= n");
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t lab : labels) {
            if (lab >= k) throw IndexOutOfRange("from_assignment: fold label out of range");
            ++sizes[lab];
        }
        for (std::size_t s : sizes)
            if (s == 0) throw BadFoldCount("from_assignment: empty fold");
        return FoldScheme(n, k, std::move(labels), seed);
    }

    std::size_t n() const { return n_; }
    std::size_t fold_count() const { return k_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::size_t>& assignment() const { return labels_; }

    std::size_t fold_of(std::size_t i) const {
        if (i >= n_) throw IndexOutOfRange("fold_of: unit index out of range");
        return labels_[i];
    }

    std::size_t fold_size(std::size_t k) const {
        check_fold(k);
        std::size_t c = 0;
        for (std::size_t lab : labels_)
            if (lab == k) ++c;
        return c;
    }

    std::vector<std::size_t> fold_members(std::size_t k) const {
        check_fold(k);
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n_; ++i)
            if (labels_[i] == k) out.push_back(i);
        return out;
    }

    // Sorted indices of every unit NOT in fold k.
    std::vector<std::size_t> exclusion_indices(std::size_t k) const {
        check_fold(k);
        std::vector<std::size_t> out;
        out.reserve(n_);
        for (std::size_t i = 0; i < n_; ++i)
            if (labels_[i] != k) out.push_back(i);
        return out;
    }

private:
    FoldScheme(std::size_t n, std::size_t k, std::vector<std::size_t> labels, std::uint64_t seed)
        : n_(n), k_(k), labels_(std::move(labels)), seed_(seed) {}

    void check_fold(std::size_t k) const {
        if (k >= k_) throw IndexOutOfRange("fold label out of range");
    }

    std::size_t n_;
    std::size_t k_;
    std::vector<std::size_t> labels_;
    std::uint64_t seed_;
};

inline FoldScheme sample_fold_scheme(std::size_t n, std::size_t k, std::uint64_t seed) {
    return FoldScheme::sample(n, k, seed);
}

}  // namespace stackcp
