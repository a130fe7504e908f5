#pragma once

#include <cstdint>
#include <vector>

#include "stackcp/dataset.hpp"
#include "stackcp/errors.hpp"
#include "stackcp/folding.hpp"
#include "stackcp/learners.hpp"
#include "stackcp/linalg.hpp"

namespace stackcp {

// Out-of-fold second-level data: Z(i, m) is the prediction for unit i by
// learner m trained with unit i's whole fold held out.
struct SecondLevelData {
    Mat z;
    Vec y;
    FoldScheme scheme;
    std::vector<LearnerSpec> specs;
};

// Base learners trained on the entire training sample; produces the
// second-level features for test units.
struct StackModel {
    std::vector<FittedLearner> models;
    std::vector<LearnerSpec> specs;
    std::uint64_t data_hash = 0;
};

inline SecondLevelData cross_fit(const Dataset& data, const std::vector<LearnerSpec>& specs,
                                 const FoldScheme& scheme) {
    if (specs.empty()) throw Error("cross_fit: no learner specs");
    if (scheme.n() != data.n()) throw DimensionMismatch("cross_fit: scheme/data size mismatch");

    const std::size_t n = data.n(), m = specs.size(), k = scheme.fold_count();
    for (const auto& spec : specs) {
        spec.check();
        for (std::size_t f = 0; f < k; ++f)
            if (n - scheme.fold_size(f) < spec.min_training_rows())
                throw FoldTooSmall("cross_fit: exclusion set smaller than learner minimum for " +
                                   spec.name());
    }

    Mat z(n, m);
    for (std::size_t f = 0; f < k; ++f) {
        const auto excl = scheme.exclusion_indices(f);
        const Dataset sub = data.subset(excl);
        const auto members = scheme.fold_members(f);
        for (std::size_t j = 0; j < m; ++j) {
            const FittedLearner model = fit(specs[j], sub.x, sub.y);  // one fit per (fold, learner)
            for (std::size_t i : members) z(i, j) = model.predict(data.x.row(i));
        }
    }
    return SecondLevelData{std::move(z), data.y, scheme, specs};
}

inline StackModel fit_full(const Dataset& data, const std::vector<LearnerSpec>& specs) {
    if (specs.empty()) throw Error("fit_full: no learner specs");
    if (data.n() == 0) throw EmptyTrainingSet("fit_full: empty dataset");
    StackModel out;
    out.specs = specs;
    out.data_hash = symmetric_hash(data.x, data.y);
    out.models.reserve(specs.size());
    for (const auto& spec : specs) out.models.push_back(fit(spec, data.x, data.y));
    return out;
}

inline Mat predict_features(const StackModel& model, const Mat& x_test) {
    Mat z0(x_test.rows(), model.models.size());
    for (std::size_t i = 0; i < x_test.rows(); ++i) {
        const Vec xi = x_test.row(i);
        for (std::size_t j = 0; j < model.models.size(); ++j)
            z0(i, j) = model.models[j].predict(xi);
    }
    return z0;
}

}  // namespace stackcp
