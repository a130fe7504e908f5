#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "stackcp/errors.hpp"
#include "stackcp/linalg.hpp"

namespace stackcp {

// Feature matrix plus response vector. Non-finite entries are rejected at
// construction; there is deliberately no imputation anywhere downstream.
struct Dataset {
    Mat x;
    Vec y;
    std::vector<std::string> feature_names;
    std::string response_name;

    std::size_t n() const { return x.rows(); }
    std::size_t d() const { return x.cols(); }

    void validate() const {
        if (x.rows() < 1 || x.cols() < 1) throw Error("dataset: need n >= 1 and d >= 1");
        if (x.rows() != y.size()) throw DimensionMismatch("dataset: X/y row mismatch");
        for (double v : x.data())
            if (!std::isfinite(v)) throw Error("dataset: non-finite feature entry");
        for (double v : y)
            if (!std::isfinite(v)) throw Error("dataset: non-finite response entry");
    }

    Dataset subset(const std::vector<std::size_t>& rows) const {
        Dataset out;
        out.x = Mat(rows.size(), x.cols());
        out.y.resize(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const std::size_t i = rows[r];
            for (std::size_t j = 0; j < x.cols(); ++j) out.x(r, j) = x(i, j);
            out.y[r] = y[i];
        }
        out.feature_names = feature_names;
        out.response_name = response_name;
        return out;
    }
};

inline double mean(const Vec& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator), 0 for a single element.
inline double stddev(const Vec& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double e : v) s += (e - m) * (e - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace stackcp
