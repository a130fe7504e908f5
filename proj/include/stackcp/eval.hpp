#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stackcp/conformal.hpp"
#include "stackcp/errors.hpp"
#include "stackcp/rng.hpp"

namespace stackcp {

struct EvaluationReport {
    std::string method;
    double alpha = 0.0;
    double coverage = 0.0;  // covered / test size, exactly
    double q1 = 0.0;        // interval width quartiles, response units
    double median = 0.0;
    double q3 = 0.0;
    std::size_t n_test = 0;
    std::size_t truncation_count = 0;
};

struct IntervalRecord {
    std::size_t index = 0;
    double lower = 0.0;
    double upper = 0.0;
    double truth = 0.0;
    bool covered = false;
};

namespace detail {

// quantile by linear interpolation between closest ranks ("type 7")
inline double quantile_type7(Vec sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// shortest round-trip decimal form; locale-independent
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// 119003 -> "119,003"; values at or above 1000 are rounded to whole units
// and comma-grouped, smaller ones shown with three decimals.
inline std::string format_width(double v) {
    const double a = std::fabs(v);
    if (a >= 1000.0) {
        const long long r = std::llround(v);
        std::string digits = std::to_string(r < 0 ? -r : r);
        std::string grouped;
        const std::size_t len = digits.size();
        for (std::size_t i = 0; i < len; ++i) {
            if (i > 0 && (len - i) % 3 == 0) grouped.push_back(',');
            grouped.push_back(digits[i]);
        }
        return (r < 0 ? "-" : "") + grouped;
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
    return std::string(buf, res.ptr);
}

inline std::string format_percent(double fraction, int decimals) {
    char buf[32];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), fraction * 100.0, std::chars_format::fixed, decimals);
    return std::string(buf, res.ptr) + "%";
}

}  // namespace detail

inline EvaluationReport evaluate(const std::vector<PredictionInterval>& intervals,
                                 const Vec& y_test, const std::string& method, double alpha) {
    if (intervals.size() != y_test.size()) throw LengthMismatch("evaluate: intervals/y_test mismatch");
    if (intervals.empty()) throw LengthMismatch("evaluate: empty test set");
    EvaluationReport rep;
    rep.method = method;
    rep.alpha = alpha;
    rep.n_test = intervals.size();
    std::size_t covered = 0;
    Vec widths(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        if (iv.lower <= y_test[i] && y_test[i] <= iv.upper) ++covered;
        widths[i] = iv.upper - iv.lower;
        if (iv.truncated_low || iv.truncated_high) ++rep.truncation_count;
    }
    rep.coverage = static_cast<double>(covered) / static_cast<double>(rep.n_test);
    std::sort(widths.begin(), widths.end());
    rep.q1 = detail::quantile_type7(widths, 0.25);
    rep.median = detail::quantile_type7(widths, 0.5);
    rep.q3 = detail::quantile_type7(widths, 0.75);
    return rep;
}

struct RenderedReport {
    std::string table;  // human-readable, one row per (method, alpha)
    std::string csv;    // machine-readable, fixed header
};

inline RenderedReport render_report(const std::string& dataset,
                                    const std::vector<EvaluationReport>& reports) {
    if (reports.empty()) throw LengthMismatch("render_report: no reports");
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Dataset", "Method", "1-alpha", "Empirical coverage", "1st quartile", "Median",
                    "3rd quartile"});
    std::string csv = "dataset,method,alpha,coverage,q1,median,q3,n_test\n";
    for (const auto& r : reports) {
        rows.push_back({dataset, r.method, detail::format_percent(1.0 - r.alpha, 0),
                        detail::format_percent(r.coverage, 1), detail::format_width(r.q1),
                        detail::format_width(r.median), detail::format_width(r.q3)});
        csv += dataset + "," + r.method + "," + detail::format_double(r.alpha) + "," +
               detail::format_double(r.coverage) + "," + detail::format_double(r.q1) + "," +
               detail::format_double(r.median) + "," + detail::format_double(r.q3) + "," +
               std::to_string(r.n_test) + "\n";
    }
    std::vector<std::size_t> width(rows[0].size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::string table;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            table += row[c];
            if (c + 1 < row.size()) table.append(width[c] - row[c].size() + 2, ' ');
        }
        table += "\n";
    }
    return RenderedReport{std::move(table), std::move(csv)};
}

inline std::vector<IntervalRecord> interval_records(const std::vector<PredictionInterval>& intervals,
                                                    const Vec& y_test) {
    if (intervals.size() != y_test.size())
        throw LengthMismatch("interval_records: intervals/y_test mismatch");
    std::vector<IntervalRecord> out(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        out[i].index = i;
        out[i].lower = intervals[i].lower;
        out[i].upper = intervals[i].upper;
        out[i].truth = y_test[i];
        out[i].covered = intervals[i].lower <= y_test[i] && y_test[i] <= intervals[i].upper;
    }
    return out;
}

inline std::string records_csv(const std::vector<IntervalRecord>& records) {
    std::string out = "index,lower,upper,truth,covered\n";
    for (const auto& r : records) {
        out += std::to_string(r.index) + "," + detail::format_double(r.lower) + "," +
               detail::format_double(r.upper) + "," + detail::format_double(r.truth) + "," +
               (r.covered ? "1" : "0") + "\n";
    }
    return out;
}

// Deterministic subsample (e.g. the fifty units shown in a plot), returned in
// index order.
inline std::vector<IntervalRecord> sample_records(const std::vector<IntervalRecord>& records,
                                                  std::size_t count, std::uint64_t seed) {
    if (count >= records.size()) return records;
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_stream(seed, "record-subsample"));
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
        std::swap(order[i], order[j]);
    }
    order.resize(count);
    std::sort(order.begin(), order.end());
    std::vector<IntervalRecord> out;
    out.reserve(count);
    for (std::size_t i : order) out.push_back(records[i]);
    return out;
}

}  // namespace stackcp
