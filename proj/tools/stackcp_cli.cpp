// Command-line front end: `run` executes a configured experiment, writing
// reports.csv / intervals_<alpha>.csv / manifest.txt; `oracle-check` compares
// the rank-one-update interval path against the brute-force grid oracle;
// `stability-probe` estimates the feasible-stack stability quantities;
// `synth` emits a synthetic dataset as CSV.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stackcp/stackcp.hpp"

namespace {

using namespace stackcp;

int cmd_run(const std::string& config_path, const std::vector<double>& alpha_override,
            int folds_override, long long seed_override, double epsilon_override,
            double u_override, double train_frac_override, const std::string& out_override,
            bool expand_bracket) {
    ExperimentConfig cfg = parse_config_file(config_path);
    if (!alpha_override.empty()) cfg.alphas = alpha_override;
    if (folds_override > 0) cfg.folds = static_cast<std::size_t>(folds_override);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (epsilon_override >= 0.0) cfg.epsilon = epsilon_override;
    if (u_override > 0.0) cfg.u = u_override;
    if (train_frac_override > 0.0) cfg.train_frac = train_frac_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (expand_bracket) cfg.expand_bracket = true;

    const ExperimentResult result = run_experiment(cfg);
    std::cout << result.table;
    if (result.dropped_rows > 0)
        std::cout << "rows dropped during ingestion: " << result.dropped_rows << "\n";
    std::cout << "wrote " << result.files_written.size() << " files to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_oracle_check(std::vector<std::size_t> sizes, std::vector<std::uint64_t> seeds,
                     double alpha, std::size_t grid_points) {
    if (sizes.empty()) sizes = {30, 40, 50, 60, 70, 80};
    if (seeds.empty()) seeds = {1, 2, 3, 4, 5, 6, 7, 8};
    const OracleCheckResult result = run_oracle_check(sizes, seeds, alpha, grid_points);
    for (const auto& inst : result.instances) {
        std::printf("n=%zu M=%zu gap_lower=%.3e gap_upper=%.3e tol=%.3e %s\n", inst.n, inst.m,
                    inst.gap_lower, inst.gap_upper, inst.tolerance, inst.ok ? "ok" : "FAIL");
    }
    std::printf("%zu/%zu instances within tolerance\n",
                result.instances.size() - static_cast<std::size_t>(std::count_if(
                                              result.instances.begin(), result.instances.end(),
                                              [](const auto& r) { return !r.ok; })),
                result.instances.size());
    return result.ok ? 0 : 1;
}

int cmd_probe(std::size_t n, std::size_t d, const std::string& func, const std::string& noise,
              double sigma, const std::string& learners, std::size_t folds, double alpha,
              std::vector<double> eps_grid, std::size_t trials, std::uint64_t seed,
              const std::string& out_path) {
    SyntheticSpec gen;
    gen.n = n;
    gen.d = d;
    gen.func = SyntheticSpec::func_from_name(func);
    gen.noise = SyntheticSpec::noise_from_name(noise);
    gen.sigma = sigma;

    if (eps_grid.empty()) {
        // default grid: response-scale multiples spanning four decades
        SyntheticSpec probe_draw = gen;
        probe_draw.seed = derive_stream(seed, "probe-scale");
        const double sd = stddev(generate(probe_draw).y);
        for (double f : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0})
            eps_grid.push_back(f * sd);
    }

    const std::vector<LearnerSpec> specs = detail::parse_learners(learners);
    const StabilityReport report = stability_probe(gen, specs, folds, alpha, eps_grid, trials, seed);
    const std::string csv = probe_report_csv(report);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        detail::write_file(out_path, csv);
        std::cout << "wrote " << out_path << " (" << report.trials << " trials)\n";
    }
    return 0;
}

int cmd_synth(std::size_t n, std::size_t d, const std::string& func, const std::string& noise,
              double sigma, std::uint64_t seed, const std::string& out_path) {
    SyntheticSpec spec;
    spec.n = n;
    spec.d = d;
    spec.func = SyntheticSpec::func_from_name(func);
    spec.noise = SyntheticSpec::noise_from_name(noise);
    spec.sigma = sigma;
    spec.seed = seed;
    const std::string csv = dataset_csv(generate(spec));
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        detail::write_file(out_path, csv);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stacked conformal prediction intervals"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a configured experiment");
    std::string config_path;
    std::vector<double> alphas;
    int folds = -1;
    long long seed = -1;
    double epsilon = -1.0, u = -1.0, train_frac = -1.0;
    std::string out_dir;
    bool expand_bracket = false;
    run->add_option("--config", config_path, "key=value config file")->required();
    run->add_option("--alpha", alphas, "miscoverage level(s); overrides the config");
    run->add_option("--folds", folds, "fold count K");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--epsilon", epsilon, "bisection tolerance (response units); 0 = 1e-3*sd");
    run->add_option("--u", u, "search bracket half-width, in sd units");
    run->add_option("--train-frac", train_frac, "training fraction");
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--expand-bracket", expand_bracket, "double u and retry while truncated");

    // oracle-check
    auto* oracle = app.add_subcommand("oracle-check",
                                      "compare fast intervals against the brute-force oracle");
    std::vector<std::size_t> sizes;
    std::vector<std::uint64_t> oc_seeds;
    double oc_alpha = 0.1;
    std::size_t grid_points = 2000;
    oracle->add_option("--sizes", sizes, "training sizes (default 30..80)");
    oracle->add_option("--seeds", oc_seeds, "instance seeds (default 1..8)");
    oracle->add_option("--alpha", oc_alpha, "miscoverage level");
    oracle->add_option("--grid", grid_points, "grid points for the brute-force scan");

    // stability-probe
    auto* probe = app.add_subcommand("stability-probe",
                                     "estimate feasible-stack stability (delta, h) empirically");
    std::size_t pr_n = 100, pr_d = 4, pr_folds = 5, pr_trials = 200;
    double pr_sigma = 1.0, pr_alpha = 0.1;
    std::string pr_func = "linear", pr_noise = "gaussian";
    std::string pr_learners = "ridge(lambda=1)";
    std::vector<double> pr_eps;
    std::uint64_t pr_seed = 1;
    std::string pr_out;
    probe->add_option("--n", pr_n, "training size per trial");
    probe->add_option("--d", pr_d, "feature count");
    probe->add_option("--func", pr_func, "ground-truth function (linear|friedman1|constant)");
    probe->add_option("--noise", pr_noise, "noise model (gaussian|heteroscedastic)");
    probe->add_option("--sigma", pr_sigma, "noise scale");
    probe->add_option("--learners", pr_learners, "base learner specs");
    probe->add_option("--folds", pr_folds, "fold count K");
    probe->add_option("--alpha", pr_alpha, "miscoverage level");
    probe->add_option("--eps", pr_eps, "epsilon grid (default: response-scale multiples)");
    probe->add_option("--trials", pr_trials, "Monte-Carlo trials");
    probe->add_option("--seed", pr_seed, "master seed");
    probe->add_option("--out", pr_out, "output CSV path (default stdout)");

    // synth
    auto* synth = app.add_subcommand("synth", "write a synthetic dataset as CSV");
    std::size_t sy_n = 500, sy_d = 4;
    double sy_sigma = 1.0;
    std::string sy_func = "linear", sy_noise = "gaussian", sy_out;
    std::uint64_t sy_seed = 1;
    synth->add_option("--n", sy_n, "rows");
    synth->add_option("--d", sy_d, "features");
    synth->add_option("--func", sy_func, "ground-truth function");
    synth->add_option("--noise", sy_noise, "noise model");
    synth->add_option("--sigma", sy_sigma, "noise scale");
    synth->add_option("--seed", sy_seed, "seed");
    synth->add_option("--out", sy_out, "output CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, alphas, folds, seed, epsilon, u, train_frac, out_dir,
                           expand_bracket);
        if (oracle->parsed()) return cmd_oracle_check(sizes, oc_seeds, oc_alpha, grid_points);
        if (probe->parsed())
            return cmd_probe(pr_n, pr_d, pr_func, pr_noise, pr_sigma, pr_learners, pr_folds,
                             pr_alpha, pr_eps, pr_trials, pr_seed, pr_out);
        if (synth->parsed())
            return cmd_synth(sy_n, sy_d, sy_func, sy_noise, sy_sigma, sy_seed, sy_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
