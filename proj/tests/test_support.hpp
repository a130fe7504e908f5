#pragma once

// Test-side reference implementations, kept independent of the library's
// numerical paths: plain Gauss-Jordan with partial pivoting, naive products,
// and small random-instance generators.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stackcp/linalg.hpp"
#include "stackcp/rng.hpp"

namespace testsupport {

using stackcp::Mat;
using stackcp::Rng;
using stackcp::Vec;

inline Mat gj_inverse(Mat a) {
    const std::size_t n = a.rows();
    Mat inv = Mat::identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) throw std::runtime_error("gj_inverse: singular");
        if (piv != col)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(col, j), a(piv, j));
                std::swap(inv(col, j), inv(piv, j));
            }
        const double p = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= p;
            inv(col, j) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a(r, col) == 0.0) continue;
            const double f = a(r, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

inline Vec gj_solve(const Mat& a, const Vec& b) { return stackcp::matvec(gj_inverse(a), b); }

inline Mat naive_matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

inline Mat random_mat(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Mat m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = scale * rng.gaussian();
    return m;
}

inline Vec random_vec(Rng& rng, std::size_t len, double scale = 1.0) {
    Vec v(len);
    for (auto& e : v) e = scale * rng.gaussian();
    return v;
}

// R^T R + jitter*I: SPD by construction
inline Mat random_spd(Rng& rng, std::size_t n, double jitter = 0.5) {
    const Mat r = random_mat(rng, n + 2, n);
    Mat g = stackcp::gram(r);
    for (std::size_t i = 0; i < n; ++i) g(i, i) += jitter;
    return g;
}

}  // namespace testsupport
