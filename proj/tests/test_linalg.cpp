#include <catch2/catch_amalgamated.hpp>

#include "stackcp/linalg.hpp"
#include "test_support.hpp"

using namespace stackcp;
using testsupport::gj_inverse;
using testsupport::random_mat;
using testsupport::random_spd;
using testsupport::random_vec;

TEST_CASE("gram_inverse: identity design", "[linalg]") {
    const Mat z = Mat::identity(2);
    const Mat a = gram_inverse(z);
    CHECK(a(0, 0) == Catch::Approx(1.0));
    CHECK(a(1, 1) == Catch::Approx(1.0));
    CHECK(a(0, 1) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("gram_inverse: diagonal closed form", "[linalg]") {
    Mat z(3, 2);
    z(0, 0) = 2.0;
    z(1, 1) = 1.0;
    const Mat a = gram_inverse(z);
    CHECK(a(0, 0) == Catch::Approx(0.25));
    CHECK(a(1, 1) == Catch::Approx(1.0));
    CHECK(a(0, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(a(1, 0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("gram_inverse: agrees with Gauss-Jordan oracle", "[linalg]") {
    Rng rng(42);
    const Mat z = random_mat(rng, 50, 3);
    const Mat a = gram_inverse(z);
    const Mat expected = gj_inverse(gram(z));
    CHECK(max_abs_diff(a, expected) <= 1e-10);
}

TEST_CASE("gram_inverse: error cases", "[linalg]") {
    Mat dup(4, 2);  // identical columns -> rank deficient
    for (std::size_t i = 0; i < 4; ++i) {
        dup(i, 0) = static_cast<double>(i + 1);
        dup(i, 1) = static_cast<double>(i + 1);
    }
    CHECK_THROWS_AS(gram_inverse(dup), SingularGram);

    Mat nearly(4, 2);  // condition estimate far above 1e12
    for (std::size_t i = 0; i < 4; ++i) {
        nearly(i, 0) = static_cast<double>(i + 1);
        nearly(i, 1) = static_cast<double>(i + 1) * (1.0 + 1e-14 * static_cast<double>(i));
    }
    CHECK_THROWS_AS(gram_inverse(nearly), SingularGram);

    CHECK_THROWS_AS(gram_inverse(Mat(2, 3)), DimensionMismatch);  // n < M
}

TEST_CASE("rank_one_inverse_update: closed forms", "[linalg]") {
    const Mat a = Mat::identity(2);

    SECTION("unit vector update") {
        const Mat b = rank_one_inverse_update(a, {1.0, 0.0});
        CHECK(b(0, 0) == Catch::Approx(0.5));
        CHECK(b(1, 1) == Catch::Approx(1.0));
        CHECK(b(0, 1) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("zero update is a no-op") {
        const Mat b = rank_one_inverse_update(a, {0.0, 0.0});
        CHECK(max_abs_diff(a, b) == 0.0);
    }
}

TEST_CASE("rank_one_inverse_update: matches direct inversion", "[linalg]") {
    Rng rng(7);
    const Mat g = random_spd(rng, 3);
    const Mat a = gj_inverse(g);
    const Vec z0 = random_vec(rng, 3);

    Mat updated = g;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) updated(i, j) += z0[i] * z0[j];

    const Mat b = rank_one_inverse_update(a, z0);
    CHECK(max_abs_diff(b, gj_inverse(updated)) <= 1e-10);
}

TEST_CASE("rank_one_inverse_update: guards", "[linalg]") {
    Mat a(1, 1);
    a(0, 0) = -1.0;  // not SPD; drives the denominator to zero
    CHECK_THROWS_AS(rank_one_inverse_update(a, {1.0}), DenominatorNearZero);
    CHECK_THROWS_AS(rank_one_inverse_update(Mat::identity(2), {1.0, 2.0, 3.0}), DimensionMismatch);
}

TEST_CASE("Sherman-Morrison consistency over random instances", "[linalg]") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 1 + static_cast<std::size_t>(rng.below(6));
        const Mat g = random_spd(rng, m);
        const Mat a = spd_inverse(g);
        const Vec z0 = random_vec(rng, m, 2.0);

        const Mat b = rank_one_inverse_update(a, z0);
        Mat updated = g;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) updated(i, j) += z0[i] * z0[j];

        CHECK(max_abs_diff(matmul(b, updated), Mat::identity(m)) <= 1e-8);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) REQUIRE(b(i, j) == b(j, i));
        CHECK_NOTHROW(detail::cholesky(b));  // B stays SPD
    }
}

TEST_CASE("gram_inverse times gram is the identity", "[linalg]") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 1 + static_cast<std::size_t>(rng.below(4));
        const std::size_t n = m + 5 + static_cast<std::size_t>(rng.below(40));
        const Mat z = random_mat(rng, n, m);
        const Mat a = gram_inverse(z);
        CHECK(max_abs_diff(matmul(a, gram(z)), Mat::identity(m)) <= 1e-8);
    }
}

TEST_CASE("matvec and matmul", "[linalg]") {
    Rng rng(3);

    SECTION("identity and annihilator") {
        const Vec x = random_vec(rng, 4);
        const Vec same = matvec(Mat::identity(4), x);
        for (std::size_t i = 0; i < 4; ++i) CHECK(same[i] == x[i]);
        const Vec zero = matvec(Mat(3, 4), x);
        for (double v : zero) CHECK(v == 0.0);
    }

    SECTION("random product matches scalar-loop oracle") {
        const Mat a = random_mat(rng, 4, 3);
        const Vec x = random_vec(rng, 3);
        Mat xcol(3, 1);
        for (std::size_t i = 0; i < 3; ++i) xcol(i, 0) = x[i];
        const Mat expected = testsupport::naive_matmul(a, xcol);
        const Vec got = matvec(a, x);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::fabs(got[i] - expected(i, 0)) <= 1e-12);

        const Mat b = random_mat(rng, 3, 5);
        CHECK(max_abs_diff(matmul(a, b), testsupport::naive_matmul(a, b)) <= 1e-12);
    }

    SECTION("dimension mismatch") {
        CHECK_THROWS_AS(matvec(Mat(2, 3), Vec{1.0, 2.0}), DimensionMismatch);
        CHECK_THROWS_AS(matmul(Mat(2, 3), Mat(2, 3)), DimensionMismatch);
    }
}
