#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "stackcp/errors.hpp"

namespace stackcp {

using Vec = std::vector<double>;

// Dense row-major matrix. The dimensions in this library are tiny (M is the
// number of base learners), so there is no point in anything fancier.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }
    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }

    Vec row(std::size_t i) const {
        return Vec(row_ptr(i), row_ptr(i) + cols_);
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec matvec(const Mat& a, const Vec& x) {
    if (a.cols() != x.size()) throw DimensionMismatch("matvec: dimensions do not conform");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* r = a.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matmul: dimensions do not conform");
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline Mat transpose(const Mat& a) {
    Mat t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// Z^T Z, accumulated column-against-column in a fixed order.
inline Mat gram(const Mat& z) {
    const std::size_t n = z.rows(), m = z.cols();
    Mat g(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += z(i, a) * z(i, b);
            g(a, b) = s;
            g(b, a) = s;
        }
    }
    return g;
}

namespace detail {

constexpr double kConditionLimit = 1e12;

// Lower Cholesky factor of an SPD matrix. Throws SingularGram when a pivot
// is non-positive or the diagonal-based condition estimate exceeds the limit.
inline Mat cholesky(const Mat& g) {
    const std::size_t n = g.rows();
    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = g(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) throw SingularGram("cholesky: matrix is not positive definite");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = g(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    double dmin = l(0, 0), dmax = l(0, 0);
    for (std::size_t j = 1; j < n; ++j) {
        dmin = std::min(dmin, l(j, j));
        dmax = std::max(dmax, l(j, j));
    }
    const double ratio = dmax / dmin;
    if (ratio * ratio > kConditionLimit)
        throw SingularGram("cholesky: condition estimate above 1e12");
    return l;
}

// Solve L L^T x = b in place of the returned vector.
inline Vec cholesky_solve(const Mat& l, const Vec& b) {
    const std::size_t n = l.rows();
    Vec x(b);
    for (std::size_t i = 0; i < n; ++i) {  // forward: L w = b
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {  // backward: L^T x = w
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

inline void symmetrize(Mat& a) {
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
}

}  // namespace detail

// Inverse of an SPD matrix via Cholesky, symmetrized against round-off drift.
inline Mat spd_inverse(const Mat& g) {
    const std::size_t n = g.rows();
    const Mat l = detail::cholesky(g);
    Mat inv(n, n);
    Vec e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const Vec col = detail::cholesky_solve(l, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = 0.0;
    }
    detail::symmetrize(inv);
    return inv;
}

// A = (Z^T Z)^{-1}. Requires n >= M >= 1 and a numerically invertible Gram;
// a SingularGram here usually means two base learners produce collinear
// predictions, and the caller should drop one or add ridge jitter.
inline Mat gram_inverse(const Mat& z) {
    if (z.cols() < 1 || z.rows() < z.cols())
        throw DimensionMismatch("gram_inverse: need n >= M >= 1");
    return spd_inverse(gram(z));
}

// Sherman-Morrison: B = (Z^T Z + z0 z0^T)^{-1} from A = (Z^T Z)^{-1}.
// For SPD A the denominator 1 + z0^T A z0 is strictly positive; the
// DenominatorNearZero branch is unreachable then and only guards misuse.
inline Mat rank_one_inverse_update(const Mat& a, const Vec& z0) {
    if (a.rows() != a.cols() || a.rows() != z0.size())
        throw DimensionMismatch("rank_one_inverse_update: dimensions do not conform");
    const Vec w = matvec(a, z0);           // A z0 (= z0^T A by symmetry)
    const double denom = 1.0 + dot(z0, w);
    if (std::fabs(denom) < 1e-12)
        throw DenominatorNearZero("rank_one_inverse_update: 1 + z0^T A z0 ~ 0");
    const std::size_t n = a.rows();
    Mat b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = a(i, j) - w[i] * w[j] / denom;
    detail::symmetrize(b);
    return b;
}

inline double max_abs_diff(const Mat& a, const Mat& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::fabs(a(i, j) - b(i, j)));
    return m;
}

}  // namespace stackcp
