#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "stackcp/probe.hpp"

using namespace stackcp;

namespace {

SyntheticSpec probe_generator(std::size_t n) {
    SyntheticSpec gen;
    gen.n = n;
    gen.d = 3;
    gen.sigma = 1.0;
    return gen;
}

}  // namespace

TEST_CASE("stability_probe: constant-predictor learners are stable", "[probe]") {
    // depth-0 forests predict bootstrap means; with one unit moved out of
    // cross-fitting the scores wobble only at the bootstrap-noise scale.
    // A direct run of this exact configuration put the smallest epsilon with
    // delta_hat = 0 at 0.64; frozen here as the recorded threshold.
    const Vec eps_grid{1e-2, 0.64, 1.0};
    const StabilityReport report = stability_probe(
        probe_generator(60), {LearnerSpec::Forest(20, 0)}, 4, 0.1, eps_grid, 60, 5);
    REQUIRE(report.trials == 60);
    CHECK(report.delta_hat[0] > 0.5);  // below the noise scale nearly every trial moves
    CHECK(report.delta_hat[1] == 0.0);
    CHECK(report.delta_hat[2] == 0.0);
}

TEST_CASE("stability_probe: infinite epsilon sentinel", "[probe]") {
    const Vec eps_grid{std::numeric_limits<double>::infinity()};
    const StabilityReport report = stability_probe(
        probe_generator(40), {LearnerSpec::Ridge(1.0)}, 4, 0.1, eps_grid, 25, 9);
    CHECK(report.delta_hat[0] == 0.0);
}

TEST_CASE("stability_probe: delta_hat non-increasing in epsilon", "[probe]") {
    Vec eps_grid;
    for (double e = 1e-4; e <= 1.0; e *= 4.0) eps_grid.push_back(e);
    const StabilityReport report = stability_probe(
        probe_generator(100), {LearnerSpec::Ridge(1.0)}, 5, 0.1, eps_grid, 200, 13);
    REQUIRE(report.trials == 200);
    for (std::size_t e = 1; e < eps_grid.size(); ++e)
        CHECK(report.delta_hat[e] <= report.delta_hat[e - 1]);
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        CHECK(report.delta_hat[e] >= 0.0);
        CHECK(report.delta_hat[e] <= 1.0);
        CHECK(report.h_hat[e] >= 0.0);
        CHECK(report.h_hat[e] <= 1.0);
    }
}

TEST_CASE("stability_probe: single trial and determinism", "[probe]") {
    const Vec eps_grid{1e-2, 1e-1};
    const StabilityReport one = stability_probe(
        probe_generator(30), {LearnerSpec::Knn(5)}, 3, 0.2, eps_grid, 1, 3);
    CHECK(one.trials == 1);

    const StabilityReport a = stability_probe(
        probe_generator(30), {LearnerSpec::Knn(5)}, 3, 0.2, eps_grid, 10, 17);
    const StabilityReport b = stability_probe(
        probe_generator(30), {LearnerSpec::Knn(5)}, 3, 0.2, eps_grid, 10, 17);
    CHECK(a.delta_hat == b.delta_hat);
    CHECK(a.h_hat == b.h_hat);
}
