#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "stackcp/conformal.hpp"
#include "stackcp/dataset.hpp"
#include "stackcp/errors.hpp"
#include "stackcp/rng.hpp"
#include "stackcp/stack.hpp"

namespace stackcp {

// Split (inductive) conformal around a stacked point predictor: the stack and
// its meta coefficients are fitted on the proper-training part once, the
// calibration part only supplies sorted absolute residuals, and each alpha
// then picks its own rank-based half-width q.
class SplitConformalBaseline {
public:
    static SplitConformalBaseline fit(const Dataset& train, double calib_fraction,
                                      const std::vector<LearnerSpec>& specs, std::uint64_t seed,
                                      std::size_t folds = 5) {
        if (!(calib_fraction > 0.0 && calib_fraction < 1.0))
            throw BadConfig("split baseline: calib_fraction must be in (0,1)");
        const std::size_t n = train.n();
        const std::size_t n_cal = static_cast<std::size_t>(calib_fraction * static_cast<double>(n));
        if (n_cal < 1 || n - n_cal < 2) throw CalibrationTooSmall("split baseline: split too small");

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_stream(seed, "baseline-split"));
        rng.shuffle(order);
        std::vector<std::size_t> calib_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_cal));
        std::vector<std::size_t> proper_idx(order.begin() + static_cast<std::ptrdiff_t>(n_cal), order.end());
        std::sort(calib_idx.begin(), calib_idx.end());
        std::sort(proper_idx.begin(), proper_idx.end());

        const Dataset proper = train.subset(proper_idx);
        const Dataset calib = train.subset(calib_idx);

        SplitConformalBaseline out;
        const FoldScheme scheme =
            sample_fold_scheme(proper.n(), folds, derive_stream(seed, "baseline-folds"));
        const SecondLevelData sld = cross_fit(proper, specs, scheme);
        const MetaState meta = fit_meta(sld.z, sld.y);
        out.stack_ = fit_full(proper, specs);
        out.beta_ = meta.beta;

        out.calib_residuals_.resize(calib.n());
        for (std::size_t i = 0; i < calib.n(); ++i) {
            const double pred = out.point_predict(calib.x.row(i));
            out.calib_residuals_[i] = std::abs(calib.y[i] - pred);
        }
        std::sort(out.calib_residuals_.begin(), out.calib_residuals_.end());
        return out;
    }

    double point_predict(const Vec& x) const {
        double s = 0.0;
        for (std::size_t j = 0; j < stack_.models.size(); ++j)
            s += beta_[j] * stack_.models[j].predict(x);
        return s;
    }

    // rank-ceil((1-alpha)(n_cal+1)) absolute calibration residual
    double half_width(double alpha) const {
        const std::size_t n_cal = calib_residuals_.size();
        const std::size_t rank = conformal_rank(alpha, n_cal);
        if (rank > n_cal)
            throw CalibrationTooSmall("split baseline: calibration set too small for alpha");
        return calib_residuals_[rank - 1];
    }

    PredictionInterval interval(const Vec& x, double alpha) const {
        const double q = half_width(alpha);
        const double pred = point_predict(x);
        PredictionInterval out;
        out.point = pred;
        out.lower = pred - q;
        out.upper = pred + q;
        return out;
    }

    std::vector<PredictionInterval> intervals(const Mat& x_test, double alpha) const {
        const double q = half_width(alpha);
        std::vector<PredictionInterval> out(x_test.rows());
        for (std::size_t i = 0; i < x_test.rows(); ++i) {
            const double pred = point_predict(x_test.row(i));
            out[i].point = pred;
            out[i].lower = pred - q;
            out[i].upper = pred + q;
        }
        return out;
    }

    std::size_t calibration_size() const { return calib_residuals_.size(); }
    const Vec& calibration_residuals() const { return calib_residuals_; }  // sorted ascending

private:
    StackModel stack_;
    Vec beta_;
    Vec calib_residuals_;
};

// Spec-shaped convenience: an interval producer bound to one alpha. The rank
// precondition is checked here, before any caller asks for intervals.
inline SplitConformalBaseline split_conformal_baseline(const Dataset& train, double calib_fraction,
                                                       const std::vector<LearnerSpec>& specs,
                                                       double alpha, std::uint64_t seed,
                                                       std::size_t folds = 5) {
    SplitConformalBaseline out = SplitConformalBaseline::fit(train, calib_fraction, specs, seed, folds);
    (void)out.half_width(alpha);
    return out;
}

}  // namespace stackcp
