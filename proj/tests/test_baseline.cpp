#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stackcp/baseline.hpp"
#include "stackcp/synth.hpp"
#include "test_support.hpp"

using namespace stackcp;
using testsupport::random_mat;

namespace {

Dataset linear_dataset(std::uint64_t seed, std::size_t n, std::size_t d, double sigma) {
    SyntheticSpec spec;
    spec.n = n;
    spec.d = d;
    spec.sigma = sigma;
    spec.seed = seed;
    return generate(spec);
}

}  // namespace

TEST_CASE("split baseline: zero noise gives near-degenerate intervals", "[baseline]") {
    const Dataset data = linear_dataset(3, 80, 2, 0.0);
    const SplitConformalBaseline baseline =
        SplitConformalBaseline::fit(data, 0.25, {LearnerSpec::Ridge(0.0)}, 11);
    CHECK(baseline.half_width(0.1) <= 1e-8);
    const PredictionInterval iv = baseline.interval(data.x.row(0), 0.1);
    CHECK(iv.upper - iv.lower <= 2e-8);
    CHECK(std::fabs(iv.point - data.y[0]) <= 1e-6);
}

TEST_CASE("split baseline: q is the rank-18 residual of 19", "[baseline]") {
    // n=76 at calib_fraction 0.25 puts exactly 19 units in calibration;
    // ceil(0.9 * 20) = 18, so q must be the 18th smallest absolute residual
    const Dataset data = linear_dataset(7, 76, 2, 1.0);
    const SplitConformalBaseline baseline =
        SplitConformalBaseline::fit(data, 0.25, {LearnerSpec::Ridge(1.0)}, 21);
    REQUIRE(baseline.calibration_size() == 19);
    CHECK(baseline.half_width(0.1) == baseline.calibration_residuals()[17]);
}

TEST_CASE("split baseline: calibration too small", "[baseline]") {
    const Dataset data = linear_dataset(9, 40, 2, 1.0);
    // 10 calibration points cannot support alpha=0.05: ceil(0.95*11) = 11 > 10
    const SplitConformalBaseline baseline =
        SplitConformalBaseline::fit(data, 0.25, {LearnerSpec::Ridge(1.0)}, 31);
    CHECK_THROWS_AS(baseline.half_width(0.05), CalibrationTooSmall);
    CHECK_THROWS_AS(split_conformal_baseline(data, 0.25, {LearnerSpec::Ridge(1.0)}, 0.05, 31),
                    CalibrationTooSmall);
    CHECK_NOTHROW(split_conformal_baseline(data, 0.25, {LearnerSpec::Ridge(1.0)}, 0.2, 31));
}

TEST_CASE("split baseline: Monte-Carlo coverage at alpha=0.1", "[baseline]") {
    // 20 seeds, 100 test points each; calibration of 240 puts the expected
    // conditional coverage at 217/241 ~ 0.9004
    double coverage_sum = 0.0;
    const int kSeeds = 20, kTest = 100;
    for (int rep = 0; rep < kSeeds; ++rep) {
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(rep);
        const Dataset train = linear_dataset(seed, 640, 3, 1.0);
        const Dataset test = linear_dataset(seed ^ 0xabcdef, kTest, 3, 1.0);
        const SplitConformalBaseline baseline =
            SplitConformalBaseline::fit(train, 0.375, {LearnerSpec::Ridge(1.0)}, seed);
        REQUIRE(baseline.calibration_size() == 240);
        std::size_t covered = 0;
        const auto intervals = baseline.intervals(test.x, 0.1);
        for (int i = 0; i < kTest; ++i)
            if (intervals[i].lower <= test.y[i] && test.y[i] <= intervals[i].upper) ++covered;
        coverage_sum += static_cast<double>(covered) / kTest;
    }
    const double coverage = coverage_sum / kSeeds;
    CHECK(coverage >= 0.88);
    CHECK(coverage <= 0.92);
}
