#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "stackcp/dataset.hpp"
#include "stackcp/errors.hpp"
#include "stackcp/hashing.hpp"
#include "stackcp/linalg.hpp"
#include "stackcp/rng.hpp"

namespace stackcp {

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

enum class LearnerKind { ridge, knn, forest };

struct RidgeSpec {
    double lambda = 1.0;  // penalty on slopes; the intercept is never penalized
};

struct KnnSpec {
    std::size_t k = 5;
};

struct ForestSpec {
    std::size_t trees = 100;
    std::size_t max_depth = 16;   // 0 means the root itself is a leaf
    std::size_t min_leaf = 3;
    std::size_t mtry = 0;         // features tried per split; 0 = ceil(d/3)
};

struct LearnerSpec {
    LearnerKind kind = LearnerKind::ridge;
    RidgeSpec ridge;
    KnnSpec knn;
    ForestSpec forest;

    static LearnerSpec Ridge(double lambda) {
        LearnerSpec s;
        s.kind = LearnerKind::ridge;
        s.ridge.lambda = lambda;
        return s;
    }
    static LearnerSpec Knn(std::size_t k) {
        LearnerSpec s;
        s.kind = LearnerKind::knn;
        s.knn.k = k;
        return s;
    }
    static LearnerSpec Forest(std::size_t trees, std::size_t max_depth = 16,
                              std::size_t min_leaf = 3, std::size_t mtry = 0) {
        LearnerSpec s;
        s.kind = LearnerKind::forest;
        s.forest = ForestSpec{trees, max_depth, min_leaf, mtry};
        return s;
    }

    std::string name() const {
        switch (kind) {
            case LearnerKind::ridge: return "ridge";
            case LearnerKind::knn: return "knn";
            case LearnerKind::forest: return "forest";
        }
        return "?";
    }

    // Smallest training set the learner can be fitted on.
    std::size_t min_training_rows() const {
        return kind == LearnerKind::knn ? knn.k : 1;
    }

    void check() const {
        switch (kind) {
            case LearnerKind::ridge:
                if (!(ridge.lambda >= 0.0) || !std::isfinite(ridge.lambda))
                    throw BadHyperparameter("ridge: lambda must be >= 0");
                break;
            case LearnerKind::knn:
                if (knn.k < 1) throw BadHyperparameter("knn: k must be >= 1");
                break;
            case LearnerKind::forest:
                if (forest.trees < 1) throw BadHyperparameter("forest: trees must be >= 1");
                if (forest.min_leaf < 1) throw BadHyperparameter("forest: min_leaf must be >= 1");
                break;
        }
    }
};

// Fit counter for cost-bound tests (cross_fit must do exactly K*M base fits).
inline std::atomic<std::uint64_t>& fit_invocation_count() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

// ---------------------------------------------------------------------------
// Canonical row order
//
// Every learner first sorts its training rows by content (features
// lexicographically, then response). All downstream index-based work --
// summation order, neighbor tie-breaks, bootstrap draws -- then depends only
// on the multiset of rows, which makes fits and predictions bit-identical
// under any permutation of the training data.
// ---------------------------------------------------------------------------

namespace detail {

inline bool row_content_less(const Mat& x, const Vec& y, std::size_t a, std::size_t b) {
    const double* ra = x.row_ptr(a);
    const double* rb = x.row_ptr(b);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        if (ra[j] < rb[j]) return true;
        if (ra[j] > rb[j]) return false;
    }
    return y[a] < y[b];
}

struct CanonicalData {
    Mat x;
    Vec y;
};

inline CanonicalData canonicalize(const Mat& x, const Vec& y) {
    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return row_content_less(x, y, a, b); });
    CanonicalData out;
    out.x = Mat(x.rows(), x.cols());
    out.y.resize(y.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        for (std::size_t j = 0; j < x.cols(); ++j) out.x(r, j) = x(order[r], j);
        out.y[r] = y[order[r]];
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ridge regression (with intercept, slopes penalized)
// ---------------------------------------------------------------------------

struct RidgeModel {
    Vec weights;
    double intercept = 0.0;
};

namespace detail {

inline RidgeModel fit_ridge(const RidgeSpec& spec, const CanonicalData& data) {
    const std::size_t n = data.x.rows(), d = data.x.cols();
    Vec xbar(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) xbar[j] += data.x(i, j);
    for (std::size_t j = 0; j < d; ++j) xbar[j] /= static_cast<double>(n);
    const double ybar = mean(data.y);

    // centered normal equations: (Xc^T Xc + lambda I) w = Xc^T yc
    Mat g(d, d);
    Vec rhs(d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (data.x(i, a) - xbar[a]) * (data.x(i, b) - xbar[b]);
            g(a, b) = s;
            g(b, a) = s;
        }
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r += (data.x(i, a) - xbar[a]) * (data.y[i] - ybar);
        rhs[a] = r;
        g(a, a) += spec.lambda;
    }
    RidgeModel m;
    m.weights = detail::cholesky_solve(detail::cholesky(g), rhs);
    double dotxw = 0.0;
    for (std::size_t j = 0; j < d; ++j) dotxw += xbar[j] * m.weights[j];
    m.intercept = ybar - dotxw;
    return m;
}

inline double predict_ridge(const RidgeModel& m, const Vec& x) {
    double s = m.intercept;
    for (std::size_t j = 0; j < x.size(); ++j) s += m.weights[j] * x[j];
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// k-nearest-neighbors
// ---------------------------------------------------------------------------

struct KnnModel {
    Mat x;  // canonical order
    Vec y;
    std::size_t k = 1;
};

namespace detail {

inline double predict_knn(const KnnModel& m, const Vec& q) {
    const std::size_t n = m.x.rows();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = m.x.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double diff = r[j] - q[j];
            s += diff * diff;
        }
        dist[i] = {s, i};
    }
    // Ties resolve by canonical index, which is itself a function of row
    // content only, so neighbor selection ignores original input order.
    std::sort(dist.begin(), dist.end());
    double s = 0.0;
    for (std::size_t r = 0; r < m.k; ++r) s += m.y[dist[r].second];
    return s / static_cast<double>(m.k);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Random forest of CART regression trees
// ---------------------------------------------------------------------------

struct ForestModel {
    struct Node {
        int feature = -1;  // -1 = leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    struct Tree {
        std::vector<Node> nodes;
    };
    std::vector<Tree> trees;
    std::size_t d = 0;
};

namespace detail {

// Forest randomization is keyed by row content and tree/node identity rather
// than by a single data-seeded stream: each row draws a Poisson(1) bootstrap
// weight from (row hash, tree index), and each node draws its candidate
// features from (tree index, root-to-node path). Fits stay deterministic and
// permutation-invariant, tree j never depends on how many trees are grown,
// and -- the reason for the construction -- adding or removing one training
// row leaves every other row's bootstrap weight and every aligned node's
// feature draw unchanged, so single-unit perturbations move predictions by
// O(1/n) instead of redrawing the whole ensemble.
constexpr std::uint64_t kForestSalt = 0x8f0c59ab327d11e9ULL;

inline std::uint64_t tree_stream(std::size_t tree_index) {
    return mix64(kForestSalt ^ (0x9e3779b97f4a7c15ULL * (tree_index + 1)));
}

// Poisson(1) via inverse CDF on a content-keyed uniform.
inline std::size_t poisson1_weight(std::uint64_t row_hash, std::uint64_t tree_seed) {
    static constexpr double kCum[] = {0.36787944117144233, 0.7357588823428847,
                                      0.9196986029286058,  0.9810118431238462,
                                      0.9963401531726563,  0.9994058151824183,
                                      0.9999167588507119,  0.9999897508033253};
    const std::uint64_t bits = mix64(row_hash ^ tree_seed);
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    std::size_t k = 0;
    while (k < 8 && u >= kCum[k]) ++k;
    return k;
}

struct TreeBuilder {
    const CanonicalData& data;
    const ForestSpec& spec;
    std::size_t mtry;
    std::uint64_t tree_seed;
    ForestModel::Tree tree;

    double leaf_value(const std::vector<std::size_t>& idx) const {
        double s = 0.0;
        for (std::size_t i : idx) s += data.y[i];
        return s / static_cast<double>(idx.size());
    }

    int make_leaf(const std::vector<std::size_t>& idx) {
        ForestModel::Node node;
        node.value = leaf_value(idx);
        tree.nodes.push_back(node);
        return static_cast<int>(tree.nodes.size() - 1);
    }

    struct Split {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double score = 0.0;  // SSE of children; smaller is better
    };

    Split best_split(const std::vector<std::size_t>& idx, std::uint64_t path_id) const {
        const std::size_t cnt = idx.size();
        // mtry distinct candidate features, keyed by (tree, node path)
        std::vector<std::size_t> feats(data.x.cols());
        std::iota(feats.begin(), feats.end(), std::size_t{0});
        const std::size_t take = std::min(mtry, feats.size());
        Rng rng(derive_stream(tree_seed, "node-features", path_id));
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(feats.size() - i));
            std::swap(feats[i], feats[j]);
        }

        Split best;
        std::vector<std::pair<double, std::size_t>> vals(cnt);
        for (std::size_t fi = 0; fi < take; ++fi) {
            const std::size_t f = feats[fi];
            for (std::size_t p = 0; p < cnt; ++p) vals[p] = {data.x(idx[p], f), idx[p]};
            std::sort(vals.begin(), vals.end());
            // prefix sums over the sorted order
            double ly = 0.0, ly2 = 0.0;
            double ty = 0.0, ty2 = 0.0;
            for (std::size_t p = 0; p < cnt; ++p) {
                const double yv = data.y[vals[p].second];
                ty += yv;
                ty2 += yv * yv;
            }
            for (std::size_t p = 0; p + 1 < cnt; ++p) {
                const double yv = data.y[vals[p].second];
                ly += yv;
                ly2 += yv * yv;
                const std::size_t nl = p + 1, nr = cnt - nl;
                if (nl < spec.min_leaf || nr < spec.min_leaf) continue;
                if (vals[p].first == vals[p + 1].first) continue;  // no boundary here
                const double ry = ty - ly, ry2 = ty2 - ly2;
                const double sse = (ly2 - ly * ly / static_cast<double>(nl)) +
                                   (ry2 - ry * ry / static_cast<double>(nr));
                if (!best.found || sse < best.score) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (vals[p].first + vals[p + 1].first);
                    best.score = sse;
                }
            }
        }
        return best;
    }

    int build(const std::vector<std::size_t>& idx, std::size_t depth, std::uint64_t path_id) {
        bool pure = true;
        for (std::size_t i = 1; i < idx.size() && pure; ++i)
            pure = data.y[idx[i]] == data.y[idx[0]];
        if (depth >= spec.max_depth || idx.size() < 2 * spec.min_leaf || pure)
            return make_leaf(idx);
        const Split split = best_split(idx, path_id);
        if (!split.found) return make_leaf(idx);

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (data.x(i, split.feature) <= split.threshold ? left : right).push_back(i);

        ForestModel::Node node;
        node.feature = static_cast<int>(split.feature);
        node.threshold = split.threshold;
        tree.nodes.push_back(node);
        const int self = static_cast<int>(tree.nodes.size() - 1);
        const int l = build(left, depth + 1, path_id * 2);
        const int r = build(right, depth + 1, path_id * 2 + 1);
        tree.nodes[self].left = l;
        tree.nodes[self].right = r;
        return self;
    }
};

inline ForestModel fit_forest(const ForestSpec& spec, const CanonicalData& data) {
    const std::size_t n = data.x.rows(), d = data.x.cols();
    const std::size_t mtry = spec.mtry > 0 ? std::min(spec.mtry, d) : (d + 2) / 3;
    std::vector<std::uint64_t> row_hashes(n);
    for (std::size_t i = 0; i < n; ++i)
        row_hashes[i] = hash_row(data.x.row_ptr(i), d, data.y[i]);

    ForestModel model;
    model.d = d;
    model.trees.resize(spec.trees);
    for (std::size_t j = 0; j < spec.trees; ++j) {
        const std::uint64_t seed = tree_stream(j);
        std::vector<std::size_t> boot;
        boot.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t w = poisson1_weight(row_hashes[i], seed);
            for (std::size_t rep = 0; rep < w; ++rep) boot.push_back(i);
        }
        if (boot.empty())  // possible only for tiny n; fall back to the full sample
            for (std::size_t i = 0; i < n; ++i) boot.push_back(i);
        TreeBuilder builder{data, spec, mtry, seed, {}};
        builder.build(boot, 0, 1);
        model.trees[j] = std::move(builder.tree);
    }
    return model;
}

inline double predict_tree(const ForestModel::Tree& tree, const Vec& x) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        const auto& nd = tree.nodes[node];
        node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return tree.nodes[node].value;
}

inline double predict_forest(const ForestModel& m, const Vec& x) {
    double s = 0.0;
    for (const auto& tree : m.trees) s += predict_tree(tree, x);
    return s / static_cast<double>(m.trees.size());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// FittedLearner
// ---------------------------------------------------------------------------

class FittedLearner {
public:
    FittedLearner() = default;

    double predict(const Vec& x) const {
        if (x.size() != d_) throw DimensionMismatch("predict: feature dimensionality mismatch");
        switch (spec_.kind) {
            case LearnerKind::ridge: return detail::predict_ridge(std::get<RidgeModel>(model_), x);
            case LearnerKind::knn: return detail::predict_knn(std::get<KnnModel>(model_), x);
            case LearnerKind::forest: return detail::predict_forest(std::get<ForestModel>(model_), x);
        }
        throw Error("predict: unknown learner kind");
    }

    LearnerKind kind() const { return spec_.kind; }
    const LearnerSpec& spec() const { return spec_; }
    std::uint64_t training_hash() const { return hash_; }

    friend FittedLearner fit(const LearnerSpec&, const Mat&, const Vec&);

private:
    LearnerSpec spec_;
    std::uint64_t hash_ = 0;
    std::size_t d_ = 0;
    std::variant<RidgeModel, KnnModel, ForestModel> model_;
};

inline FittedLearner fit(const LearnerSpec& spec, const Mat& x, const Vec& y) {
    spec.check();
    if (x.rows() == 0) throw EmptyTrainingSet("fit: empty training set");
    if (x.rows() != y.size()) throw DimensionMismatch("fit: X/y row mismatch");
    if (spec.kind == LearnerKind::knn && spec.knn.k > x.rows())
        throw BadHyperparameter("knn: k exceeds training set size");

    fit_invocation_count().fetch_add(1, std::memory_order_relaxed);

    const detail::CanonicalData data = detail::canonicalize(x, y);
    FittedLearner out;
    out.spec_ = spec;
    out.hash_ = symmetric_hash(data.x, data.y);
    out.d_ = x.cols();
    switch (spec.kind) {
        case LearnerKind::ridge:
            out.model_ = detail::fit_ridge(spec.ridge, data);
            break;
        case LearnerKind::knn:
            out.model_ = KnnModel{data.x, data.y, spec.knn.k};
            break;
        case LearnerKind::forest:
            out.model_ = detail::fit_forest(spec.forest, data);
            break;
    }
    return out;
}

}  // namespace stackcp
