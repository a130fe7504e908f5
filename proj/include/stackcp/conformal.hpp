#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stackcp/dataset.hpp"
#include "stackcp/errors.hpp"
#include "stackcp/linalg.hpp"

namespace stackcp {

// Fitted multiple-linear-regression meta-learner on the second-level data,
// plus everything the per-query conformal machinery reuses.
struct MetaState {
    Mat a;      // (Z^T Z)^{-1}
    Vec beta;   // A Z^T y
    double sd;  // sample standard deviation of y, sets the search bracket scale
    Mat z;
    Vec y;

    std::size_t n() const { return z.rows(); }
    std::size_t m() const { return z.cols(); }
};

struct ConformalConfig {
    double alpha = 0.1;        // nominal miscoverage
    double epsilon = 0.0;      // bisection tolerance, response units
    double u = 10.0;           // bracket half-width in units of sd
    double denom_floor = 1e-6;
    bool expand_bracket = false;  // retry with doubled u while truncated

    // epsilon defaults to 1e-3 * sd when not set explicitly.
    static ConformalConfig with_defaults(double alpha, double sd) {
        ConformalConfig cfg;
        cfg.alpha = alpha;
        cfg.epsilon = 1e-3 * sd;
        return cfg;
    }

    double effective_epsilon(double sd) const { return epsilon > 0.0 ? epsilon : 1e-3 * sd; }
};

struct ScorePair {
    double r0 = 0.0;     // conformity score of the candidate pair
    double r_hat = 0.0;  // rank-ceil((1-alpha)(n+1)) training score
};

struct PredictionInterval {
    double lower = 0.0;
    double upper = 0.0;
    double point = 0.0;  // z0^T beta
    bool truncated_low = false;   // conformal region still open at the bracket end
    bool truncated_high = false;
};

// Floor-engagement bookkeeping; optional everywhere it is accepted.
struct ScoreDiagnostics {
    std::size_t floor_events = 0;
};

// ceil((1-alpha)(n+1)) without floating-point off-by-one: alpha is first
// recovered as a small rational via continued fractions when one matches to
// 1e-12, in which case the ceiling is exact integer arithmetic; otherwise the
// product is nudged down by 1e-12 before taking the ceiling.
inline std::size_t conformal_rank(double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw RankOutOfRange("conformal_rank: alpha must be in (0,1)");
    constexpr std::int64_t kMaxDen = 1000000;
    double frac = alpha;
    std::int64_t p_prev = 1, p_cur = static_cast<std::int64_t>(frac);
    std::int64_t q_prev = 0, q_cur = 1;
    double rem = frac - static_cast<double>(p_cur);
    for (int iter = 0; iter < 64 && q_cur <= kMaxDen; ++iter) {
        if (std::fabs(alpha - static_cast<double>(p_cur) / static_cast<double>(q_cur)) < 1e-12) {
            const std::int64_t p = p_cur, q = q_cur;  // alpha = p/q
            const std::int64_t num = (q - p) * static_cast<std::int64_t>(n + 1);
            return static_cast<std::size_t>((num + q - 1) / q);
        }
        if (rem == 0.0) break;
        const double inv = 1.0 / rem;
        if (inv > 1e15) break;
        const std::int64_t a = static_cast<std::int64_t>(inv);
        rem = inv - static_cast<double>(a);
        const std::int64_t p_next = a * p_cur + p_prev;
        const std::int64_t q_next = a * q_cur + q_prev;
        p_prev = p_cur; p_cur = p_next;
        q_prev = q_cur; q_cur = q_next;
    }
    const double v = (1.0 - alpha) * static_cast<double>(n + 1);
    return static_cast<std::size_t>(std::ceil(v - 1e-12 * std::max(1.0, std::fabs(v))));
}

inline MetaState fit_meta(const Mat& z, const Vec& y) {
    if (z.rows() != y.size()) throw DimensionMismatch("fit_meta: Z/y row mismatch");
    if (z.rows() <= z.cols()) throw DimensionMismatch("fit_meta: need n > M");
    MetaState st;
    st.a = gram_inverse(z);
    st.beta = matvec(st.a, matvec(transpose(z), y));
    st.sd = stddev(y);
    st.z = z;
    st.y = y;
    return st;
}

namespace detail {

inline double floored(double denom, double floor, ScoreDiagnostics* diag) {
    if (denom < floor) {
        if (diag) ++diag->floor_events;
        return floor;
    }
    return denom;
}

// k-th smallest (1-based) of v, without reordering the caller's copy.
inline double order_statistic(Vec v, std::size_t k) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
    return v[k - 1];
}

// Z^T v without materializing the transpose.
inline Vec zt_times(const Mat& z, const Vec& v) {
    Vec out(z.cols(), 0.0);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const double* zi = z.row_ptr(i);
        const double vi = v[i];
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += zi[j] * vi;
    }
    return out;
}

}  // namespace detail

// Conformity scores for the candidate pair (z0, y0) against the training
// sample. The augmented-sample coefficients come from the precomputed
// rank-one update B = (Z^T Z + z0 z0^T)^{-1}; the residual regression reuses
// A and B the same way, so no additional inverses are ever formed. Scores are
// absolute residuals normalized by (1 + predicted residual), which is what
// makes the interval widths adaptive; the denominator is floored at
// cfg.denom_floor since the residual regression is unconstrained and can
// dip at or below -1.
inline ScorePair conformity_scores(const Vec& z0, double y0, const MetaState& st, const Mat& b,
                                   const ConformalConfig& cfg, ScoreDiagnostics* diag = nullptr) {
    const std::size_t n = st.n();
    const std::size_t rank = conformal_rank(cfg.alpha, n);
    if (rank > n) throw RankOutOfRange("conformity_scores: ceil((1-alpha)(n+1)) exceeds n");

    const Vec bz0 = matvec(b, z0);

    // coefficients refitted with (z0, y0) appended
    Vec beta0(st.beta);
    const double gap = y0 - dot(z0, st.beta);
    for (std::size_t j = 0; j < beta0.size(); ++j) beta0[j] += gap * bz0[j];

    // absolute residuals under the augmented fit
    Vec yres(n);
    for (std::size_t i = 0; i < n; ++i) {
        double pred = 0.0;
        const double* zi = st.z.row_ptr(i);
        for (std::size_t j = 0; j < beta0.size(); ++j) pred += zi[j] * beta0[j];
        yres[i] = std::fabs(st.y[i] - pred);
    }
    const double yres0 = std::fabs(y0 - dot(z0, beta0));

    // residual regression, augmented by the same rank-one update
    Vec beta_res = matvec(st.a, detail::zt_times(st.z, yres));
    const double gap_res = yres0 - dot(z0, beta_res);
    for (std::size_t j = 0; j < beta_res.size(); ++j) beta_res[j] += gap_res * bz0[j];

    Vec scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        double delta = 0.0;
        const double* zi = st.z.row_ptr(i);
        for (std::size_t j = 0; j < beta_res.size(); ++j) delta += zi[j] * beta_res[j];
        scores[i] = yres[i] / detail::floored(1.0 + delta, cfg.denom_floor, diag);
    }
    const double delta0 = dot(z0, beta_res);

    ScorePair out;
    out.r_hat = detail::order_statistic(std::move(scores), rank);
    out.r0 = yres0 / detail::floored(1.0 + delta0, cfg.denom_floor, diag);
    return out;
}

namespace detail {

struct BisectionResult {
    double lower = 0.0;
    double upper = 0.0;
    bool truncated_low = false;
    bool truncated_high = false;
};

inline BisectionResult bisect_interval(const MetaState& st, const Vec& z0, const Mat& b,
                                       const ConformalConfig& cfg, double u,
                                       ScoreDiagnostics* diag) {
    const double point = dot(z0, st.beta);
    const double eps = cfg.effective_epsilon(st.sd);
    const double halfwidth = u * st.sd;
    const auto accepted = [&](double y0) {
        const ScorePair s = conformity_scores(z0, y0, st, b, cfg, diag);
        return s.r0 <= s.r_hat;
    };

    BisectionResult res;
    res.truncated_low = accepted(point - halfwidth);
    double inf = point, lower = point - halfwidth;
    while (inf - lower > eps) {
        const double y0 = 0.5 * (lower + inf);
        if (accepted(y0)) inf = y0; else lower = y0;
    }
    res.lower = inf;

    res.truncated_high = accepted(point + halfwidth);
    double sup = point, upper = point + halfwidth;
    while (upper - sup > eps) {
        const double y0 = 0.5 * (sup + upper);
        if (accepted(y0)) sup = y0; else upper = y0;
    }
    res.upper = sup;
    return res;
}

}  // namespace detail

// Full conformal interval for one test point: bisection from the point
// prediction out to point +/- u*sd, keeping candidate responses whose score
// r0 stays within the rank threshold r_hat. The bisection presumes the
// accepted region inside the bracket is an interval around the point
// prediction; when the bracket end itself is still accepted the flags record
// that the true conformal region may extend past it (optionally retried with
// a doubled bracket).
inline PredictionInterval full_cp_interval(const MetaState& st, const Vec& z0,
                                           const ConformalConfig& cfg,
                                           ScoreDiagnostics* diag = nullptr) {
    const std::size_t rank = conformal_rank(cfg.alpha, st.n());
    if (rank > st.n()) throw RankOutOfRange("full_cp_interval: ceil((1-alpha)(n+1)) exceeds n");

    const Mat b = rank_one_inverse_update(st.a, z0);
    double u = cfg.u;
    detail::BisectionResult res = detail::bisect_interval(st, z0, b, cfg, u, diag);
    if (cfg.expand_bracket) {
        for (int retry = 0; retry < 8 && (res.truncated_low || res.truncated_high); ++retry) {
            u *= 2.0;
            res = detail::bisect_interval(st, z0, b, cfg, u, diag);
        }
    }

    PredictionInterval out;
    out.point = dot(z0, st.beta);
    out.lower = res.lower;
    out.upper = res.upper;
    out.truncated_low = res.truncated_low;
    out.truncated_high = res.truncated_high;
    return out;
}

}  // namespace stackcp
