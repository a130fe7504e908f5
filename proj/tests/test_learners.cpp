#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "stackcp/hashing.hpp"
#include "stackcp/learners.hpp"
#include "test_support.hpp"

using namespace stackcp;
using testsupport::gj_solve;
using testsupport::random_mat;
using testsupport::random_vec;

namespace {

struct Problem {
    Mat x;
    Vec y;
};

Problem random_problem(Rng& rng, std::size_t n, std::size_t d) {
    Problem p;
    p.x = random_mat(rng, n, d);
    p.y = random_vec(rng, n);
    return p;
}

Problem permuted(const Problem& p, Rng& rng) {
    std::vector<std::size_t> order(p.x.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    Problem out;
    out.x = Mat(p.x.rows(), p.x.cols());
    out.y.resize(p.y.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        for (std::size_t j = 0; j < p.x.cols(); ++j) out.x(r, j) = p.x(order[r], j);
        out.y[r] = p.y[order[r]];
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// symmetric_hash
// ---------------------------------------------------------------------------

TEST_CASE("symmetric_hash: invariant under row order", "[learners]") {
    Rng rng(5);
    const Problem p = random_problem(rng, 12, 3);
    Problem reversed;
    reversed.x = Mat(12, 3);
    reversed.y.resize(12);
    for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = 0; j < 3; ++j) reversed.x(i, j) = p.x(11 - i, j);
        reversed.y[i] = p.y[11 - i];
    }
    CHECK(symmetric_hash(p.x, p.y) == symmetric_hash(reversed.x, reversed.y));
}

TEST_CASE("symmetric_hash: collision spot-check over 10000 perturbed pairs", "[learners]") {
    Rng rng(77);
    std::size_t collisions = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        Mat x(1, 4);
        for (std::size_t j = 0; j < 4; ++j) x(0, j) = rng.gaussian();
        Vec y{rng.gaussian()};
        Mat x2 = x;
        Vec y2 = y;
        // perturb exactly one entry
        const std::size_t slot = static_cast<std::size_t>(rng.below(5));
        if (slot < 4) x2(0, slot) += 1.0 + rng.uniform01();
        else y2[0] += 1.0 + rng.uniform01();
        if (symmetric_hash(x, y) == symmetric_hash(x2, y2)) ++collisions;
    }
    CHECK(collisions == 0);
}

TEST_CASE("symmetric_hash: multiset-sensitive", "[learners]") {
    Rng rng(13);
    std::size_t collisions = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Problem p = random_problem(rng, 4, 2);
        // duplicate the first row
        Mat xdup(5, 2);
        Vec ydup(5);
        for (std::size_t j = 0; j < 2; ++j) xdup(0, j) = p.x(0, j);
        ydup[0] = p.y[0];
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 2; ++j) xdup(i + 1, j) = p.x(i, j);
            ydup[i + 1] = p.y[i];
        }
        if (symmetric_hash(p.x, p.y) == symmetric_hash(xdup, ydup)) ++collisions;
    }
    CHECK(collisions == 0);
}

TEST_CASE("symmetric_hash: empty training set", "[learners]") {
    CHECK_THROWS_AS(symmetric_hash(Mat(0, 2), Vec{}), EmptyTrainingSet);
}

// ---------------------------------------------------------------------------
// ridge
// ---------------------------------------------------------------------------

TEST_CASE("ridge: lambda=0 interpolates consistent linear data", "[learners]") {
    Rng rng(21);
    const Mat x = random_mat(rng, 20, 3);
    const Vec beta{2.0, -1.0, 0.5};
    Vec y(20);
    for (std::size_t i = 0; i < 20; ++i) y[i] = dot(x.row(i), beta);
    const FittedLearner model = fit(LearnerSpec::Ridge(0.0), x, y);
    for (std::size_t i = 0; i < 20; ++i)
        CHECK(model.predict(x.row(i)) == Catch::Approx(y[i]).margin(1e-8));
}

TEST_CASE("ridge: exact line", "[learners]") {
    Mat x(3, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 2.0;
    x(2, 0) = 4.0;
    const Vec y{2.0, 4.0, 8.0};
    const FittedLearner model = fit(LearnerSpec::Ridge(0.0), x, y);
    CHECK(model.predict({3.0}) == Catch::Approx(6.0).margin(1e-8));
}

TEST_CASE("ridge: closed form matches a direct normal-equations solve", "[learners]") {
    Rng rng(31);
    const std::size_t n = 30, d = 4;
    const Problem p = random_problem(rng, n, d);
    const double lambda = 0.7;
    const FittedLearner model = fit(LearnerSpec::Ridge(lambda), p.x, p.y);

    // oracle: centered system solved by Gauss-Jordan
    Vec xbar(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) xbar[j] += p.x(i, j) / static_cast<double>(n);
    const double ybar = mean(p.y);
    Mat g(d, d);
    Vec rhs(d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (p.x(i, a) - xbar[a]) * (p.x(i, b) - xbar[b]);
            g(a, b) = s;
        }
        g(a, a) += lambda;
        for (std::size_t i = 0; i < n; ++i) rhs[a] += (p.x(i, a) - xbar[a]) * (p.y[i] - ybar);
    }
    const Vec w = gj_solve(g, rhs);
    double intercept = ybar;
    for (std::size_t j = 0; j < d; ++j) intercept -= xbar[j] * w[j];

    Rng qrng(32);
    for (int q = 0; q < 10; ++q) {
        const Vec xq = random_vec(qrng, d);
        double expected = intercept;
        for (std::size_t j = 0; j < d; ++j) expected += w[j] * xq[j];
        CHECK(model.predict(xq) == Catch::Approx(expected).margin(1e-8));
    }
}

// ---------------------------------------------------------------------------
// knn
// ---------------------------------------------------------------------------

TEST_CASE("knn: k equal to the training size predicts the mean", "[learners]") {
    Rng rng(41);
    const Problem p = random_problem(rng, 15, 2);
    const FittedLearner model = fit(LearnerSpec::Knn(15), p.x, p.y);
    const double m = mean(p.y);
    for (int q = 0; q < 5; ++q)
        CHECK(model.predict(random_vec(rng, 2)) == Catch::Approx(m).margin(1e-12));
}

TEST_CASE("knn: nearest self with unique features", "[learners]") {
    Rng rng(43);
    const Problem p = random_problem(rng, 10, 2);  // gaussian features are distinct a.s.
    const FittedLearner model = fit(LearnerSpec::Knn(1), p.x, p.y);
    for (std::size_t i = 0; i < 10; ++i) CHECK(model.predict(p.x.row(i)) == p.y[i]);
}

// ---------------------------------------------------------------------------
// constant-response degenerate case, all kinds
// ---------------------------------------------------------------------------

TEST_CASE("constant responses fit to a constant predictor", "[learners]") {
    Rng rng(51);
    const Mat x = random_mat(rng, 25, 3);
    const Vec y(25, 4.25);
    const std::vector<LearnerSpec> specs = {LearnerSpec::Ridge(1.0), LearnerSpec::Knn(5),
                                            LearnerSpec::Forest(20, 8, 2)};
    for (const auto& spec : specs) {
        const FittedLearner model = fit(spec, x, y);
        for (int q = 0; q < 5; ++q)
            CHECK(model.predict(random_vec(rng, 3)) == Catch::Approx(4.25).margin(1e-12));
    }
}

// ---------------------------------------------------------------------------
// forest
// ---------------------------------------------------------------------------

TEST_CASE("forest: learns signal, keeps held-out error near the noise floor", "[learners]") {
    Rng rng(61);
    const double sigma = 0.1;
    const std::size_t n = 500, d = 3;
    const auto draw = [&](std::size_t count, Mat& x, Vec& y) {
        x = Mat(count, d);
        y.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.uniform01();
            y[i] = x(i, 0) + sigma * rng.gaussian();
        }
    };
    Mat xtr, xte;
    Vec ytr, yte;
    draw(n, xtr, ytr);
    draw(n, xte, yte);

    const FittedLearner model = fit(LearnerSpec::Forest(100, 12, 3), xtr, ytr);
    const auto rmse = [&](const Mat& x, const Vec& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double e = y[i] - model.predict(x.row(i));
            s += e * e;
        }
        return std::sqrt(s / static_cast<double>(x.rows()));
    };
    const double train_rmse = rmse(xtr, ytr);
    const double test_rmse = rmse(xte, yte);
    CHECK(train_rmse < test_rmse);
    CHECK(test_rmse < 3.0 * sigma);
}

TEST_CASE("forest: depth zero is a constant predictor", "[learners]") {
    Rng rng(62);
    const Problem p = random_problem(rng, 30, 2);
    const FittedLearner model = fit(LearnerSpec::Forest(10, 0), p.x, p.y);
    const double v0 = model.predict(random_vec(rng, 2));
    for (int q = 0; q < 5; ++q) CHECK(model.predict(random_vec(rng, 2)) == v0);
}

// ---------------------------------------------------------------------------
// shared contracts
// ---------------------------------------------------------------------------

TEST_CASE("training-row permutations never change predictions", "[learners]") {
    Rng rng(71);
    const Problem p = random_problem(rng, 40, 3);
    const std::vector<LearnerSpec> specs = {LearnerSpec::Ridge(0.5), LearnerSpec::Knn(4),
                                            LearnerSpec::Forest(15, 8, 2)};
    std::vector<Vec> queries;
    for (int q = 0; q < 10; ++q) queries.push_back(random_vec(rng, 3));

    for (const auto& spec : specs) {
        const FittedLearner base = fit(spec, p.x, p.y);
        Vec expected;
        for (const auto& q : queries) expected.push_back(base.predict(q));
        for (int perm = 0; perm < 100; ++perm) {
            const Problem shuffled = permuted(p, rng);
            const FittedLearner other = fit(spec, shuffled.x, shuffled.y);
            for (std::size_t q = 0; q < queries.size(); ++q)
                REQUIRE(other.predict(queries[q]) == expected[q]);  // bit-exact
        }
    }
}

TEST_CASE("refitting the same multiset reproduces predictions", "[learners]") {
    Rng rng(81);
    const Problem p = random_problem(rng, 35, 2);
    for (const auto& spec : {LearnerSpec::Ridge(1.0), LearnerSpec::Knn(3), LearnerSpec::Forest(10)}) {
        const FittedLearner a = fit(spec, p.x, p.y);
        const FittedLearner b = fit(spec, p.x, p.y);
        for (int q = 0; q < 10; ++q) {
            const Vec xq = random_vec(rng, 2);
            REQUIRE(a.predict(xq) == b.predict(xq));
        }
    }
}

TEST_CASE("learner error paths", "[learners]") {
    Rng rng(91);
    const Problem p = random_problem(rng, 5, 2);
    CHECK_THROWS_AS(fit(LearnerSpec::Ridge(1.0), Mat(0, 2), Vec{}), EmptyTrainingSet);
    CHECK_THROWS_AS(fit(LearnerSpec::Knn(6), p.x, p.y), BadHyperparameter);  // k > |S|
    CHECK_THROWS_AS(fit(LearnerSpec::Knn(0), p.x, p.y), BadHyperparameter);
    CHECK_THROWS_AS(fit(LearnerSpec::Ridge(-1.0), p.x, p.y), BadHyperparameter);
    CHECK_THROWS_AS(fit(LearnerSpec::Forest(0), p.x, p.y), BadHyperparameter);

    const FittedLearner model = fit(LearnerSpec::Ridge(1.0), p.x, p.y);
    CHECK_THROWS_AS(model.predict({1.0, 2.0, 3.0}), DimensionMismatch);
}
