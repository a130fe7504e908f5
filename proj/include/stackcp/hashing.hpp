#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>

#include "stackcp/errors.hpp"
#include "stackcp/linalg.hpp"
#include "stackcp/rng.hpp"

namespace stackcp {

namespace detail {

// Fixed key so that hashes are stable across runs and machines.
constexpr std::uint64_t kRowHashSalt = 0x5ca1ab1e0ddba11ULL;

inline std::uint64_t hash_accumulate(std::uint64_t h, double v) {
    if (v == 0.0) v = 0.0;  // collapse -0.0 and +0.0 to one encoding
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    h ^= bits;
    h *= 0x100000001b3ULL;
    return mix64(h ^ (h >> 29));
}

inline std::uint64_t hash_row(const double* x, std::size_t d, double y) {
    std::uint64_t h = kRowHashSalt;
    for (std::size_t j = 0; j < d; ++j) h = hash_accumulate(h, x[j]);
    return hash_accumulate(h, y);
}

}  // namespace detail

// Order-invariant, multiset-sensitive hash of a training set: per-row hashes
// are combined by modular addition, so any row permutation gives the same
// value while duplicated rows still change it. Used to seed learner-internal
// randomization, which makes fits invariant to training row order.
inline std::uint64_t symmetric_hash(const Mat& x, const Vec& y) {
    if (x.rows() == 0) throw EmptyTrainingSet("symmetric_hash: empty training set");
    if (x.rows() != y.size()) throw DimensionMismatch("symmetric_hash: X/y row mismatch");
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        sum += detail::hash_row(x.row_ptr(i), x.cols(), y[i]);
    return mix64(sum ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(x.rows())));
}

}  // namespace stackcp
