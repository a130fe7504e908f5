#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stackcp/baseline.hpp"
#include "stackcp/conformal.hpp"
#include "stackcp/csv.hpp"
#include "stackcp/dataset.hpp"
#include "stackcp/eval.hpp"
#include "stackcp/folding.hpp"
#include "stackcp/oracle.hpp"
#include "stackcp/probe.hpp"
#include "stackcp/stack.hpp"
#include "stackcp/synth.hpp"

namespace stackcp {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string dataset_path;             // CSV input; empty when synthetic
    std::string response_column = "y";
    std::optional<SyntheticSpec> synthetic;
    double train_frac = 0.7;
    double calib_frac = 0.25;             // split-baseline calibration share of the training sample
    std::size_t folds = 5;
    std::vector<LearnerSpec> learners;
    std::vector<double> alphas = {0.1};
    double epsilon = 0.0;                 // 0 = 1e-3 * sd of training responses
    double u = 10.0;
    double denom_floor = 1e-6;
    bool expand_bracket = false;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    std::string dataset_label() const {
        if (!dataset_path.empty()) return std::filesystem::path(dataset_path).stem().string();
        return "synthetic";
    }
};

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& s, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (seps.find(c) != std::string::npos) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double to_double(const std::string& s, const std::string& what) {
    double v;
    if (!parse_double(s, v)) throw BadConfig("bad numeric value for " + what + ": '" + s + "'");
    return v;
}

inline std::uint64_t to_count(const std::string& s, const std::string& what) {
    const double v = to_double(s, what);
    if (v < 0 || v != static_cast<double>(static_cast<std::uint64_t>(v)))
        throw BadConfig("expected a nonnegative integer for " + what + ": '" + s + "'");
    return static_cast<std::uint64_t>(v);
}

// "ridge(lambda=1) knn(k=10) forest(trees=100 depth=8)"
inline std::vector<LearnerSpec> parse_learners(const std::string& text) {
    std::vector<LearnerSpec> out;
    std::size_t i = 0;
    const auto skip_ws = [&] { while (i < text.size() && (text[i] == ' ' || text[i] == ',')) ++i; };
    skip_ws();
    while (i < text.size()) {
        std::string name;
        while (i < text.size() && text[i] != '(' && text[i] != ' ' && text[i] != ',')
            name.push_back(text[i++]);
        std::vector<std::pair<std::string, std::string>> params;
        if (i < text.size() && text[i] == '(') {
            ++i;
            std::string inner;
            while (i < text.size() && text[i] != ')') inner.push_back(text[i++]);
            if (i == text.size()) throw BadConfig("learners: missing ')' after " + name);
            ++i;
            for (const auto& tok : split_tokens(inner, " ,")) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos)
                    throw BadConfig("learners: expected key=value in " + name + ": '" + tok + "'");
                params.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
            }
        }
        LearnerSpec spec;
        if (name == "ridge") {
            spec = LearnerSpec::Ridge(1.0);
            for (const auto& [k, v] : params) {
                if (k == "lambda") spec.ridge.lambda = to_double(v, "ridge lambda");
                else throw BadConfig("ridge: unknown parameter '" + k + "'");
            }
        } else if (name == "knn") {
            spec = LearnerSpec::Knn(5);
            for (const auto& [k, v] : params) {
                if (k == "k") spec.knn.k = to_count(v, "knn k");
                else throw BadConfig("knn: unknown parameter '" + k + "'");
            }
        } else if (name == "forest") {
            spec = LearnerSpec::Forest(100);
            for (const auto& [k, v] : params) {
                if (k == "trees") spec.forest.trees = to_count(v, "forest trees");
                else if (k == "depth") spec.forest.max_depth = to_count(v, "forest depth");
                else if (k == "min_leaf") spec.forest.min_leaf = to_count(v, "forest min_leaf");
                else if (k == "mtry") spec.forest.mtry = to_count(v, "forest mtry");
                else throw BadConfig("forest: unknown parameter '" + k + "'");
            }
        } else {
            throw BadConfig("unknown learner kind: '" + name + "'");
        }
        spec.check();
        out.push_back(spec);
        skip_ws();
    }
    if (out.empty()) throw BadConfig("learners: none given");
    return out;
}

// "n:500 d:5 func:friedman1 noise:gaussian sigma:1"
inline SyntheticSpec parse_synthetic(const std::string& text) {
    SyntheticSpec spec;
    for (const auto& tok : split_tokens(text, " ,")) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw BadConfig("synthetic: expected key:value, got '" + tok + "'");
        const std::string k = tok.substr(0, colon), v = tok.substr(colon + 1);
        if (k == "n") spec.n = to_count(v, "synthetic n");
        else if (k == "d") spec.d = to_count(v, "synthetic d");
        else if (k == "func") spec.func = SyntheticSpec::func_from_name(v);
        else if (k == "noise") spec.noise = SyntheticSpec::noise_from_name(v);
        else if (k == "sigma") spec.sigma = to_double(v, "synthetic sigma");
        else throw BadConfig("synthetic: unknown key '" + k + "'");
    }
    return spec;
}

}  // namespace detail

inline std::string serialize_learners(const std::vector<LearnerSpec>& specs) {
    std::string out;
    for (const auto& s : specs) {
        if (!out.empty()) out += " ";
        switch (s.kind) {
            case LearnerKind::ridge:
                out += "ridge(lambda=" + detail::format_double(s.ridge.lambda) + ")";
                break;
            case LearnerKind::knn:
                out += "knn(k=" + std::to_string(s.knn.k) + ")";
                break;
            case LearnerKind::forest:
                out += "forest(trees=" + std::to_string(s.forest.trees) +
                       " depth=" + std::to_string(s.forest.max_depth) +
                       " min_leaf=" + std::to_string(s.forest.min_leaf) +
                       " mtry=" + std::to_string(s.forest.mtry) + ")";
                break;
        }
    }
    return out;
}

// Flat key = value file; '#' starts a comment; unknown keys are errors.
inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    cfg.learners = {LearnerSpec::Ridge(1.0)};
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) throw BadConfig("config: expected key = value: '" + stripped + "'");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key == "dataset") cfg.dataset_path = value;
        else if (key == "response") cfg.response_column = value;
        else if (key == "synthetic") cfg.synthetic = detail::parse_synthetic(value);
        else if (key == "train_frac") cfg.train_frac = detail::to_double(value, key);
        else if (key == "calib_frac") cfg.calib_frac = detail::to_double(value, key);
        else if (key == "folds") cfg.folds = detail::to_count(value, key);
        else if (key == "learners") cfg.learners = detail::parse_learners(value);
        else if (key == "alphas") {
            cfg.alphas.clear();
            for (const auto& tok : detail::split_tokens(value, " ,"))
                cfg.alphas.push_back(detail::to_double(tok, "alphas"));
        }
        else if (key == "epsilon") cfg.epsilon = detail::to_double(value, key);
        else if (key == "u") cfg.u = detail::to_double(value, key);
        else if (key == "denom_floor") cfg.denom_floor = detail::to_double(value, key);
        else if (key == "seed") cfg.seed = detail::to_count(value, key);
        else if (key == "out") cfg.out_dir = value;
        else throw BadConfig("config: unknown key '" + key + "'");
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("config file not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// Everything that must hold before any training starts.
inline void validate_config(const ExperimentConfig& cfg, std::size_t n_total) {
    if (cfg.learners.empty()) throw BadConfig("no learners configured");
    if (!(cfg.train_frac > 0.0 && cfg.train_frac < 1.0))
        throw BadConfig("train_frac must be in (0,1)");
    if (cfg.alphas.empty()) throw BadConfig("no alpha levels configured");
    if (cfg.u <= 0.0) throw BadConfig("u must be > 0");
    if (cfg.epsilon < 0.0) throw BadConfig("epsilon must be >= 0");
    if (cfg.denom_floor <= 0.0) throw BadConfig("denom_floor must be > 0");
    const auto n_train =
        static_cast<std::size_t>(std::llround(cfg.train_frac * static_cast<double>(n_total)));
    if (n_train < 2 || n_train >= n_total)
        throw BadConfig("train/test split leaves an empty side");
    if (cfg.folds < 2 || cfg.folds > n_train)
        throw BadConfig("folds must satisfy 2 <= K <= training size");
    if (n_train <= cfg.learners.size())
        throw BadConfig("training size must exceed the number of base learners");
    for (double alpha : cfg.alphas) {
        if (!(alpha > 0.0 && alpha < 1.0)) throw BadConfig("alpha must be in (0,1)");
        if (conformal_rank(alpha, n_train) > n_train)
            throw BadConfig("alpha=" + detail::format_double(alpha) +
                            " violates ceil((1-alpha)(n+1)) <= n for training size " +
                            std::to_string(n_train));
        const auto n_cal =
            static_cast<std::size_t>(cfg.calib_frac * static_cast<double>(n_train));
        if (n_cal < 1 || conformal_rank(alpha, n_cal) > n_cal)
            throw BadConfig("alpha=" + detail::format_double(alpha) +
                            " violates the rank precondition for calibration size " +
                            std::to_string(n_cal));
    }
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

namespace detail {

// Static-chunk parallel map over test rows; output slots are preassigned, so
// the result is identical to a sequential run.
template <typename Fn>
inline void parallel_rows(std::size_t count, Fn&& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, count == 0 ? std::size_t{1} : count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

}  // namespace detail

struct ExperimentResult {
    std::vector<EvaluationReport> reports;  // stacked + baseline, per alpha
    std::string table;
    std::size_t dropped_rows = 0;
    std::vector<std::string> files_written;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    // data
    Dataset data;
    std::size_t dropped = 0;
    if (!cfg.dataset_path.empty()) {
        LoadResult loaded = load_csv(cfg.dataset_path, cfg.response_column);
        data = std::move(loaded.data);
        dropped = loaded.dropped_rows;
    } else if (cfg.synthetic) {
        SyntheticSpec spec = *cfg.synthetic;
        spec.seed = derive_stream(cfg.seed, "synthetic-data");
        data = generate(spec);
    } else {
        throw BadConfig("config needs either 'dataset' or 'synthetic'");
    }

    validate_config(cfg, data.n());

    // train/test split
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(cfg.train_frac * static_cast<double>(data.n())));
    std::vector<std::size_t> order(data.n());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng(derive_stream(cfg.seed, "train-test-split"));
    split_rng.shuffle(order);
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    const Dataset train = data.subset(train_idx);
    const Dataset test = data.subset(test_idx);

    // stacked pipeline: K*M cross-fits + M full fits, shared across alphas
    const FoldScheme scheme =
        sample_fold_scheme(train.n(), cfg.folds, derive_stream(cfg.seed, "experiment-folds"));
    const SecondLevelData sld = cross_fit(train, cfg.learners, scheme);
    const MetaState meta = fit_meta(sld.z, sld.y);
    const StackModel full = fit_full(train, cfg.learners);
    const Mat z0 = predict_features(full, test.x);

    const SplitConformalBaseline baseline = SplitConformalBaseline::fit(
        train, cfg.calib_frac, cfg.learners, derive_stream(cfg.seed, "baseline"), cfg.folds);

    const std::filesystem::path out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);

    ExperimentResult result;
    result.dropped_rows = dropped;
    for (double alpha : cfg.alphas) {
        ConformalConfig ccfg;
        ccfg.alpha = alpha;
        ccfg.epsilon = cfg.epsilon;  // 0 -> effective 1e-3 * sd
        ccfg.u = cfg.u;
        ccfg.denom_floor = cfg.denom_floor;
        ccfg.expand_bracket = cfg.expand_bracket;

        std::vector<PredictionInterval> stacked(test.n());
        detail::parallel_rows(test.n(), [&](std::size_t i) {
            stacked[i] = full_cp_interval(meta, z0.row(i), ccfg);
        });
        const std::vector<PredictionInterval> base = baseline.intervals(test.x, alpha);

        result.reports.push_back(evaluate(stacked, test.y, "stacked_cp", alpha));
        result.reports.push_back(evaluate(base, test.y, "split_baseline", alpha));

        const auto records = interval_records(stacked, test.y);
        const std::string fname = "intervals_" + detail::format_double(alpha) + ".csv";
        detail::write_file(out_dir / fname, records_csv(records));
        result.files_written.push_back(fname);
    }

    const RenderedReport rendered = render_report(cfg.dataset_label(), result.reports);
    detail::write_file(out_dir / "reports.csv", rendered.csv);
    result.files_written.push_back("reports.csv");
    result.table = rendered.table;

    // run manifest: resolved configuration, seed, version
    std::string manifest;
    manifest += "version = " + std::string(kVersion) + "\n";
    manifest += "seed = " + std::to_string(cfg.seed) + "\n";
    if (!cfg.dataset_path.empty()) {
        manifest += "dataset = " + cfg.dataset_path + "\n";
        manifest += "response = " + cfg.response_column + "\n";
        manifest += "dropped_rows = " + std::to_string(dropped) + "\n";
    } else {
        const auto& s = *cfg.synthetic;
        manifest += "synthetic = n:" + std::to_string(s.n) + " d:" + std::to_string(s.d) +
                    " func:" + SyntheticSpec::func_name(s.func) +
                    " noise:" + SyntheticSpec::noise_name(s.noise) +
                    " sigma:" + detail::format_double(s.sigma) + "\n";
    }
    manifest += "train_frac = " + detail::format_double(cfg.train_frac) + "\n";
    manifest += "calib_frac = " + detail::format_double(cfg.calib_frac) + "\n";
    manifest += "folds = " + std::to_string(cfg.folds) + "\n";
    manifest += "learners = " + serialize_learners(cfg.learners) + "\n";
    std::string alpha_list;
    for (double a : cfg.alphas) {
        if (!alpha_list.empty()) alpha_list += " ";
        alpha_list += detail::format_double(a);
    }
    manifest += "alphas = " + alpha_list + "\n";
    manifest += "epsilon = " + detail::format_double(cfg.epsilon) + "\n";
    manifest += "u = " + detail::format_double(cfg.u) + "\n";
    manifest += "denom_floor = " + detail::format_double(cfg.denom_floor) + "\n";
    manifest += "n_train = " + std::to_string(train.n()) + "\n";
    manifest += "n_test = " + std::to_string(test.n()) + "\n";
    detail::write_file(out_dir / "manifest.txt", manifest);
    result.files_written.push_back("manifest.txt");
    return result;
}

// ---------------------------------------------------------------------------
// Oracle check: fast path vs. brute force
// ---------------------------------------------------------------------------

struct OracleInstanceResult {
    std::size_t n = 0;
    std::size_t m = 0;
    double gap_lower = 0.0;
    double gap_upper = 0.0;
    double tolerance = 0.0;
    std::size_t resampled = 0;  // instances redrawn for a disconnected accept set
    bool ok = false;
};

// One synthetic second-level instance: correlated columns around a latent
// signal, which is what stacked predictions look like. The comparison runs
// with a u=4 bracket and requires the brute-force accept set to be one
// contiguous run: the residual-normalized scores saturate for far-out
// candidates, so a few percent of small-n instances accept extra islands a
// handful of sd away from the point prediction, and there a bisection
// endpoint and a min/max grid scan legitimately measure different boundaries
// of the same disconnected set. Such instances violate the interval-shape
// premise of the bisection and are redrawn deterministically (counted in
// `resampled`); on interval-shaped instances the two routes must agree.
inline OracleInstanceResult oracle_compare_instance(std::size_t n, std::size_t m,
                                                    std::uint64_t seed, double alpha = 0.1,
                                                    std::size_t grid_points = 2000,
                                                    double u = 4.0) {
    OracleInstanceResult res;
    res.n = n;
    res.m = m;
    constexpr std::size_t kMaxResamples = 32;
    for (std::size_t attempt = 0;; ++attempt) {
        Rng rng(derive_stream(seed, "oracle-instance", attempt));
        Mat z(n, m);
        Vec y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double latent = 2.0 * rng.gaussian();
            for (std::size_t j = 0; j < m; ++j) z(i, j) = latent + 0.4 * rng.gaussian();
            y[i] = latent + 0.5 * rng.gaussian();
        }
        Vec z0(m);
        const double latent0 = 2.0 * rng.gaussian();
        for (std::size_t j = 0; j < m; ++j) z0[j] = latent0 + 0.4 * rng.gaussian();

        const MetaState st = fit_meta(z, y);
        ConformalConfig cfg = ConformalConfig::with_defaults(alpha, st.sd);
        cfg.u = u;
        const PredictionInterval fast = full_cp_interval(st, z0, cfg);

        const double halfwidth = cfg.u * st.sd;
        const Vec grid = uniform_grid(fast.point - halfwidth, fast.point + halfwidth, grid_points);
        const double grid_step = grid[1] - grid[0];
        std::vector<char> accept;
        const PredictionInterval slow =
            brute_force_interval(z, y, z0, alpha, grid, cfg.denom_floor, &accept);

        std::size_t runs = 0;
        for (std::size_t g = 0; g < accept.size(); ++g)
            if (accept[g] && (g == 0 || !accept[g - 1])) ++runs;
        if (runs > 1 && attempt < kMaxResamples) {
            ++res.resampled;
            continue;
        }

        res.gap_lower = std::fabs(fast.lower - slow.lower);
        res.gap_upper = std::fabs(fast.upper - slow.upper);
        res.tolerance = 2.0 * cfg.effective_epsilon(st.sd) + grid_step;
        res.ok = res.gap_lower <= res.tolerance && res.gap_upper <= res.tolerance;
        return res;
    }
}

struct OracleCheckResult {
    std::vector<OracleInstanceResult> instances;
    bool ok = true;
};

inline OracleCheckResult run_oracle_check(const std::vector<std::size_t>& sizes,
                                          const std::vector<std::uint64_t>& seeds,
                                          double alpha = 0.1, std::size_t grid_points = 2000) {
    OracleCheckResult out;
    std::size_t counter = 0;
    for (std::size_t n : sizes) {
        for (std::uint64_t seed : seeds) {
            const std::size_t m = 1 + counter % 4;
            ++counter;
            const OracleInstanceResult r = oracle_compare_instance(n, m, seed, alpha, grid_points);
            out.ok = out.ok && r.ok;
            out.instances.push_back(r);
        }
    }
    return out;
}

inline std::string probe_report_csv(const StabilityReport& report) {
    std::string out = "epsilon,delta_hat,h_hat,trials\n";
    for (std::size_t e = 0; e < report.eps_grid.size(); ++e) {
        out += detail::format_double(report.eps_grid[e]) + "," +
               detail::format_double(report.delta_hat[e]) + "," +
               detail::format_double(report.h_hat[e]) + "," + std::to_string(report.trials) + "\n";
    }
    return out;
}

inline std::string dataset_csv(const Dataset& data) {
    std::string out;
    for (const auto& name : data.feature_names) out += name + ",";
    out += data.response_name + "\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.d(); ++j) out += detail::format_double(data.x(i, j)) + ",";
        out += detail::format_double(data.y[i]) + "\n";
    }
    return out;
}

}  // namespace stackcp
