#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "stackcp/conformal.hpp"
#include "stackcp/dataset.hpp"
#include "stackcp/folding.hpp"
#include "stackcp/rng.hpp"
#include "stackcp/stack.hpp"
#include "stackcp/synth.hpp"

namespace stackcp {

// Empirical estimates of the stability quantities that control how far the
// feasible stack's coverage can fall below the symmetric stack's 1 - alpha:
// delta_hat(eps) is the probability that the score pair moves by at least
// eps/2 when the future pair is pulled out of cross-fitting, and h_hat(eps)
// is the probability mass of the candidate score just below the rank
// threshold. They are Monte-Carlo estimates, not certificates.
struct StabilityReport {
    Vec eps_grid;
    Vec delta_hat;
    Vec h_hat;
    std::size_t trials = 0;
};

namespace detail {

struct ProbeScores {
    double r0 = 0.0;
    double r_hat = 0.0;
};

inline ProbeScores score_pair(const Mat& z_train, const Vec& y_train, const Vec& z_last,
                              double y_last, double alpha) {
    const MetaState st = fit_meta(z_train, y_train);
    ConformalConfig cfg = ConformalConfig::with_defaults(alpha, st.sd);
    const Mat b = rank_one_inverse_update(st.a, z_last);
    const ScorePair s = conformity_scores(z_last, y_last, st, b, cfg);
    return ProbeScores{s.r0, s.r_hat};
}

inline Mat drop_last_row(const Mat& m) {
    Mat out(m.rows() - 1, m.cols());
    for (std::size_t i = 0; i + 1 < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

}  // namespace detail

// Each trial draws n+1 units, builds the symmetric stack (future pair takes
// part in cross-fitting) and the feasible stack (future pair held out, its
// second-level features coming from full-sample models), and compares the
// conformity score pairs evaluated at the realized future response. The
// feasible stack reuses the symmetric scheme restricted to the first n units
// so the two constructions differ by exactly one sample unit.
inline StabilityReport stability_probe(const SyntheticSpec& generator,
                                       const std::vector<LearnerSpec>& specs, std::size_t folds,
                                       double alpha, const Vec& eps_grid, std::size_t trials,
                                       std::uint64_t seed) {
    if (trials < 1) throw BadConfig("stability_probe: trials must be >= 1");
    const std::size_t n = generator.n;

    Vec deviation(trials);
    std::vector<char> in_boundary_band;  // per (trial, eps) flags, trial-major
    in_boundary_band.assign(trials * eps_grid.size(), 0);

    for (std::size_t t = 0; t < trials; ++t) {
        SyntheticSpec draw = generator;
        draw.n = n + 1;
        draw.seed = derive_stream(seed, "probe-trial", t);
        const Dataset full = generate(draw);
        const Vec x_future = full.x.row(n);
        const double y_future = full.y[n];

        const FoldScheme scheme =
            sample_fold_scheme(n + 1, folds, derive_stream(seed, "probe-fold", t));

        // symmetric stack: cross-fit over all n+1 units
        const SecondLevelData sym = cross_fit(full, specs, scheme);
        Vec y_train(full.y.begin(), full.y.begin() + static_cast<std::ptrdiff_t>(n));
        const detail::ProbeScores sym_scores =
            detail::score_pair(detail::drop_last_row(sym.z), y_train, sym.z.row(n), y_future, alpha);

        // feasible stack: future pair held out, same folds for the rest
        std::vector<std::size_t> train_rows(n);
        for (std::size_t i = 0; i < n; ++i) train_rows[i] = i;
        const Dataset train = full.subset(train_rows);
        std::vector<std::size_t> labels(scheme.assignment().begin(),
                                        scheme.assignment().end() - 1);
        const FoldScheme restricted = FoldScheme::from_assignment(std::move(labels),
                                                                  scheme.fold_count());
        const SecondLevelData feas = cross_fit(train, specs, restricted);
        const StackModel full_models = fit_full(train, specs);
        Vec z_future(specs.size());
        for (std::size_t j = 0; j < specs.size(); ++j)
            z_future[j] = full_models.models[j].predict(x_future);
        const detail::ProbeScores feas_scores =
            detail::score_pair(feas.z, feas.y, z_future, y_future, alpha);

        deviation[t] = std::max(std::fabs(feas_scores.r0 - sym_scores.r0),
                                std::fabs(feas_scores.r_hat - sym_scores.r_hat));
        for (std::size_t e = 0; e < eps_grid.size(); ++e) {
            const double eps = eps_grid[e];
            if (sym_scores.r_hat - eps < sym_scores.r0 && sym_scores.r0 <= sym_scores.r_hat)
                in_boundary_band[t * eps_grid.size() + e] = 1;
        }
    }

    StabilityReport report;
    report.eps_grid = eps_grid;
    report.trials = trials;
    report.delta_hat.resize(eps_grid.size());
    report.h_hat.resize(eps_grid.size());
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        std::size_t exceed = 0, band = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            if (deviation[t] >= 0.5 * eps_grid[e]) ++exceed;
            band += in_boundary_band[t * eps_grid.size() + e];
        }
        report.delta_hat[e] = static_cast<double>(exceed) / static_cast<double>(trials);
        report.h_hat[e] = static_cast<double>(band) / static_cast<double>(trials);
    }
    return report;
}

}  // namespace stackcp
