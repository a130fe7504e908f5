#pragma once

#include <cmath>
#include <vector>

#include "stackcp/conformal.hpp"
#include "stackcp/errors.hpp"
#include "stackcp/linalg.hpp"

namespace stackcp {

namespace detail {

// Gauss-Jordan inverse with full pivoting. Deliberately a separate route
// from the Cholesky/Sherman-Morrison machinery in linalg.hpp: this is the
// reference path the fast path is checked against, so the two share nothing.
inline Mat full_pivot_inverse(Mat a) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw DimensionMismatch("full_pivot_inverse: square matrix required");
    Mat inv = Mat::identity(n);
    std::vector<std::size_t> col_perm(n);
    for (std::size_t i = 0; i < n; ++i) col_perm[i] = i;

    for (std::size_t step = 0; step < n; ++step) {
        std::size_t pr = step, pc = step;
        double best = 0.0;
        for (std::size_t i = step; i < n; ++i)
            for (std::size_t j = step; j < n; ++j)
                if (std::fabs(a(i, j)) > best) {
                    best = std::fabs(a(i, j));
                    pr = i;
                    pc = j;
                }
        if (best == 0.0) throw SingularGram("full_pivot_inverse: singular matrix");
        if (pr != step)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(step, j), a(pr, j));
                std::swap(inv(step, j), inv(pr, j));
            }
        if (pc != step) {
            for (std::size_t i = 0; i < n; ++i) std::swap(a(i, step), a(i, pc));
            std::swap(col_perm[step], col_perm[pc]);
        }
        const double piv = a(step, step);
        for (std::size_t j = 0; j < n; ++j) {
            a(step, j) /= piv;
            inv(step, j) /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == step) continue;
            const double f = a(i, step);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(step, j);
                inv(i, j) -= f * inv(step, j);
            }
        }
    }
    // undo the column permutation (it permuted the solution rows)
    Mat out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(col_perm[i], j) = inv(i, j);
    return out;
}

}  // namespace detail

inline Vec uniform_grid(double lo, double hi, std::size_t count) {
    Vec g(count);
    if (count == 1) {
        g[0] = 0.5 * (lo + hi);
        return g;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) g[i] = lo + step * static_cast<double>(i);
    return g;
}

// Conformal interval by exhaustive grid scan with from-scratch augmented
// refits: for every candidate y0, both regressions are resolved on the
// (n+1)-row design via direct inversion -- no rank-one updates anywhere.
// Slow on purpose; this is the ground truth full_cp_interval must match.
// Returns the smallest and largest accepted grid candidates; accept_mask,
// when given, receives the per-candidate accept flags so callers can tell
// whether the accepted set was actually contiguous.
inline PredictionInterval brute_force_interval(const Mat& z, const Vec& y, const Vec& z0,
                                               double alpha, const Vec& grid,
                                               double denom_floor = 1e-6,
                                               std::vector<char>* accept_mask = nullptr) {
    const std::size_t n = z.rows(), m = z.cols();
    if (y.size() != n) throw DimensionMismatch("brute_force_interval: Z/y row mismatch");
    if (z0.size() != m) throw DimensionMismatch("brute_force_interval: z0 length mismatch");
    const std::size_t rank = conformal_rank(alpha, n);
    if (rank > n) throw RankOutOfRange("brute_force_interval: ceil((1-alpha)(n+1)) exceeds n");

    // augmented design [Z; z0^T]; its Gram does not depend on the candidate
    Mat zaug(n + 1, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) zaug(i, j) = z(i, j);
    for (std::size_t j = 0; j < m; ++j) zaug(n, j) = z0[j];
    const Mat gaug_inv = detail::full_pivot_inverse(gram(zaug));
    const Mat g_inv = detail::full_pivot_inverse(gram(z));
    const double point = dot(z0, matvec(g_inv, detail::zt_times(z, y)));

    Vec yaug(n + 1), resaug(n + 1), scores(n);
    bool any = false;
    double lo = 0.0, hi = 0.0;
    bool low_end_accepted = false, high_end_accepted = false;
    if (accept_mask) accept_mask->assign(grid.size(), 0);
    for (std::size_t gidx = 0; gidx < grid.size(); ++gidx) {
        const double y0 = grid[gidx];
        for (std::size_t i = 0; i < n; ++i) yaug[i] = y[i];
        yaug[n] = y0;
        const Vec beta0 = matvec(gaug_inv, detail::zt_times(zaug, yaug));
        for (std::size_t i = 0; i <= n; ++i) {
            double pred = 0.0;
            const double* zi = zaug.row_ptr(i);
            for (std::size_t j = 0; j < m; ++j) pred += zi[j] * beta0[j];
            resaug[i] = std::fabs(yaug[i] - pred);
        }
        const Vec beta_res = matvec(gaug_inv, detail::zt_times(zaug, resaug));
        for (std::size_t i = 0; i < n; ++i) {
            double delta = 0.0;
            const double* zi = zaug.row_ptr(i);
            for (std::size_t j = 0; j < m; ++j) delta += zi[j] * beta_res[j];
            scores[i] = resaug[i] / std::max(1.0 + delta, denom_floor);
        }
        const double delta0 = dot(z0, beta_res);
        const double r0 = resaug[n] / std::max(1.0 + delta0, denom_floor);
        const double r_hat = detail::order_statistic(scores, rank);
        if (r0 <= r_hat) {
            if (!any) {
                lo = y0;
                any = true;
            }
            hi = y0;
            if (accept_mask) (*accept_mask)[gidx] = 1;
            if (gidx == 0) low_end_accepted = true;
            if (gidx + 1 == grid.size()) high_end_accepted = true;
        }
    }

    PredictionInterval out;
    out.point = point;
    out.lower = any ? lo : point;
    out.upper = any ? hi : point;
    out.truncated_low = low_end_accepted;
    out.truncated_high = high_end_accepted;
    return out;
}

}  // namespace stackcp
