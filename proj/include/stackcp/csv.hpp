#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "stackcp/dataset.hpp"
#include "stackcp/errors.hpp"

namespace stackcp {

namespace detail {

// Minimal RFC-4180-ish splitting: quoted fields, doubled-quote escapes.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t')) --b;
    return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last && std::isfinite(out);
}

inline bool is_missing(const std::string& cell) {
    const std::string t = trim(cell);
    return t.empty() || t == "NA" || t == "na" || t == "NaN" || t == "nan" || t == "?";
}

}  // namespace detail

struct LoadResult {
    Dataset data;
    std::size_t dropped_rows = 0;
};

// Load a CSV with a header row. Column typing is inferred from the cells: a
// column is numeric when at least half of its non-missing cells parse as
// finite numbers, categorical otherwise. Categorical columns are one-hot
// encoded with categories ordered lexicographically ("col=value" indicator
// names). Any row with a missing cell, or a non-numeric cell in a numeric
// column, is dropped and counted; nothing is imputed.
inline LoadResult load_csv(const std::string& path, const std::string& response_column) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw EmptyAfterCleaning("load_csv: empty file");
    const std::vector<std::string> header = detail::split_csv_line(line);
    const std::size_t ncol = header.size();

    std::size_t response_idx = ncol;
    for (std::size_t j = 0; j < ncol; ++j)
        if (detail::trim(header[j]) == response_column) response_idx = j;
    if (response_idx == ncol)
        throw MissingColumn("load_csv: response column '" + response_column + "' not found");

    std::vector<std::vector<std::string>> raw;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        cells.resize(ncol);  // short rows -> empty cells -> dropped below
        raw.push_back(std::move(cells));
    }

    // column typing
    std::vector<bool> numeric(ncol, true);
    for (std::size_t j = 0; j < ncol; ++j) {
        std::size_t present = 0, parsed = 0;
        for (const auto& row : raw) {
            if (detail::is_missing(row[j])) continue;
            ++present;
            double v;
            if (detail::parse_double(row[j], v)) ++parsed;
        }
        numeric[j] = present == 0 || 2 * parsed >= present;
    }
    numeric[response_idx] = true;  // the response is always numeric

    // category dictionaries, lexicographically ordered
    std::vector<std::vector<std::string>> categories(ncol);
    for (std::size_t j = 0; j < ncol; ++j) {
        if (numeric[j]) continue;
        std::map<std::string, bool> seen;
        for (const auto& row : raw)
            if (!detail::is_missing(row[j])) seen[detail::trim(row[j])] = true;
        for (const auto& [cat, _] : seen) categories[j].push_back(cat);
    }

    std::vector<std::string> names;
    for (std::size_t j = 0; j < ncol; ++j) {
        if (j == response_idx) continue;
        if (numeric[j]) {
            names.push_back(detail::trim(header[j]));
        } else {
            for (const auto& cat : categories[j]) names.push_back(detail::trim(header[j]) + "=" + cat);
        }
    }

    std::vector<Vec> rows;
    Vec responses;
    std::size_t dropped = 0;
    for (const auto& row : raw) {
        Vec feat;
        feat.reserve(names.size());
        bool ok = true;
        double yval = 0.0;
        for (std::size_t j = 0; j < ncol && ok; ++j) {
            if (detail::is_missing(row[j])) {
                ok = false;
                break;
            }
            if (j == response_idx) {
                ok = detail::parse_double(row[j], yval);
            } else if (numeric[j]) {
                double v;
                ok = detail::parse_double(row[j], v);
                if (ok) feat.push_back(v);
            } else {
                const std::string cat = detail::trim(row[j]);
                for (const auto& c : categories[j]) feat.push_back(c == cat ? 1.0 : 0.0);
            }
        }
        if (!ok) {
            ++dropped;
            continue;
        }
        rows.push_back(std::move(feat));
        responses.push_back(yval);
    }
    if (rows.empty()) throw EmptyAfterCleaning("load_csv: no usable rows after cleaning");

    LoadResult out;
    out.dropped_rows = dropped;
    out.data.x = Mat(rows.size(), names.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < names.size(); ++j) out.data.x(i, j) = rows[i][j];
    out.data.y = std::move(responses);
    out.data.feature_names = std::move(names);
    out.data.response_name = response_column;
    out.data.validate();
    return out;
}

}  // namespace stackcp
