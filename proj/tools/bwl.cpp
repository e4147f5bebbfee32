// bwl: command-line runner for the Barron-Wiener-Laguerre experiments.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <vector>

#include "bwl/csv.hpp"
#include "bwl/experiments.hpp"

namespace fs = std::filesystem;
using namespace bwl;
using namespace bwl::bench;

namespace {

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
    int jobs = 1;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_out) {
    c.out = default_out;
    c.seed_opt = cmd->add_option("--seed", c.seed, "random seed");
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--config", c.config, "JSON config; explicit flags override it")->check(CLI::ExistingFile);
    c.jobs_opt = cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

// Applies explicitly given flags after the config file has been loaded.
using Overrides = std::vector<std::function<void()>>;

template <typename T, typename Target>
void flag(CLI::App* cmd, Overrides& overrides, const std::string& name, T& storage, Target& target,
          const std::string& help) {
    auto* opt = cmd->add_option(name, storage, help);
    overrides.push_back([opt, &storage, &target] {
        if (opt->count() > 0) target = storage;
    });
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename Options>
void apply_common(const Common& c, Options& o) {
    if (c.seed_opt->count() > 0) o.seed = c.seed;
    if (c.jobs_opt->count() > 0) o.jobs = c.jobs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Barron-Wiener-Laguerre models: benchmarks and experiments"};
    app.require_subcommand(1);

    // bench-gaussian
    Common bench_common;
    BenchOptions bench_opts;
    Overrides bench_overrides;
    std::string fit_name = "both";
    auto* bench = app.add_subcommand("bench-gaussian", "tri-modal Gaussian approximation benchmark");
    add_common(bench, bench_common, "out/bench-gaussian");
    BenchOptions bench_flags;
    std::vector<int> dims;
    auto* dims_opt = bench->add_option("--dims", dims, "dimensions in 1..5")->delimiter(',');
    flag(bench, bench_overrides, "--samples", bench_flags.samples, bench_opts.samples, "training samples M");
    flag(bench, bench_overrides, "--features", bench_flags.features, bench_opts.features, "random features K");
    flag(bench, bench_overrides, "--repeats", bench_flags.repeats, bench_opts.repeats, "seeded repetitions");
    auto* fit_opt = bench->add_option("--fit", fit_name, "ls, bayes or both")
                        ->check(CLI::IsMember({"ls", "bayes", "both"}));

    // sysid
    Common sysid_common;
    SysidOptions sysid_opts;
    SysidOptions sysid_flags;
    Overrides sysid_overrides;
    std::string lengthscale_text;
    auto* sysid = app.add_subcommand("sysid", "system identification of a forced second-order system");
    add_common(sysid, sysid_common, "out/sysid");
    flag(sysid, sysid_overrides, "--order", sysid_flags.order, sysid_opts.order, "Laguerre order p");
    flag(sysid, sysid_overrides, "--lambda", sysid_flags.lambda, sysid_opts.lambda, "forgetting factor");
    flag(sysid, sysid_overrides, "--features", sysid_flags.features, sysid_opts.features, "random Fourier features K");
    flag(sysid, sysid_overrides, "--noise-std", sysid_flags.noise_std, sysid_opts.noise_std, "measurement noise std");
    flag(sysid, sysid_overrides, "--reg-sigma", sysid_flags.reg_sigma, sysid_opts.reg_sigma, "regression noise std");
    flag(sysid, sysid_overrides, "--alpha", sysid_flags.alpha, sysid_opts.alpha, "prior precision");
    flag(sysid, sysid_overrides, "--horizon", sysid_flags.horizon, sysid_opts.horizon, "simulated time span");
    flag(sysid, sysid_overrides, "--dt", sysid_flags.dt, sysid_opts.dt, "sample interval");
    auto* ls_opt = sysid->add_option("--lengthscale", lengthscale_text, "RFF lengthscale: median or a number");

    // timeseries
    Common ts_common;
    TimeseriesOptions ts_opts;
    TimeseriesOptions ts_flags;
    Overrides ts_overrides;
    std::string activation_name, order_mode_name;
    auto* ts = app.add_subcommand("timeseries", "Van der Pol one-step forecasting and rollout");
    add_common(ts, ts_common, "out/timeseries");
    flag(ts, ts_overrides, "--order", ts_flags.order, ts_opts.order, "Laguerre order p");
    flag(ts, ts_overrides, "--lambda", ts_flags.lambda, ts_opts.lambda, "forgetting factor");
    flag(ts, ts_overrides, "--neurons", ts_flags.neurons, ts_opts.neurons, "hidden neurons");
    flag(ts, ts_overrides, "--noise-std", ts_flags.noise_std, ts_opts.noise_std, "measurement noise std");
    flag(ts, ts_overrides, "--reg-sigma", ts_flags.reg_sigma, ts_opts.reg_sigma, "regression noise std");
    flag(ts, ts_overrides, "--alpha", ts_flags.alpha, ts_opts.alpha, "prior precision");
    flag(ts, ts_overrides, "--mu", ts_flags.mu, ts_opts.mu, "Van der Pol damping");
    flag(ts, ts_overrides, "--shift", ts_flags.shift, ts_opts.shift, "forecast shift k");
    flag(ts, ts_overrides, "--horizon", ts_flags.horizon, ts_opts.horizon, "simulated time span");
    flag(ts, ts_overrides, "--dt", ts_flags.dt, ts_opts.dt, "sample interval");
    auto* act_opt = ts->add_option("--activation", activation_name, "tanh, relu, sigmoid or cosine");
    auto* mode_opt = ts->add_option("--order-mode", order_mode_name, "per-channel or split")
                         ->check(CLI::IsMember({"per-channel", "split"}));

    // plot-data
    std::string report_path, table_name = "samples", bands_out;
    auto* plot = app.add_subcommand("plot-data", "write a mean +/- 2 std band table from a report");
    plot->add_option("report", report_path, "report.json of a previous run")->required();
    plot->add_option("--table", table_name, "samples or rollout")->capture_default_str();
    plot->add_option("--out", bands_out, "output file (default: bands.csv next to the report)");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto start = std::chrono::steady_clock::now();
        if (bench->parsed()) {
            if (!bench_common.config.empty()) {
                bench_opts = bench_options_from_json(read_json_file(bench_common.config), bench_opts);
            }
            for (auto& o : bench_overrides) o();
            if (dims_opt->count() > 0) bench_opts.dims = dims;
            if (fit_opt->count() > 0) bench_opts.fit = parse_fit_mode(fit_name);
            apply_common(bench_common, bench_opts);
            const BenchRun run = run_bench_gaussian(bench_opts);
            write_outputs(run, bench_common.out, seconds_since(start));
            std::cout << table1_csv(run);
        } else if (sysid->parsed()) {
            if (!sysid_common.config.empty()) {
                sysid_opts = sysid_options_from_json(read_json_file(sysid_common.config), sysid_opts);
            }
            for (auto& o : sysid_overrides) o();
            if (ls_opt->count() > 0) {
                if (lengthscale_text == "median") {
                    sysid_opts.lengthscale.reset();
                } else {
                    try {
                        sysid_opts.lengthscale = std::stod(lengthscale_text);
                    } catch (const std::exception&) {
                        throw ConfigError("--lengthscale must be 'median' or a number");
                    }
                }
            }
            apply_common(sysid_common, sysid_opts);
            const SysidRun run = run_sysid(sysid_opts);
            write_outputs(run, sysid_common.out, seconds_since(start));
            std::printf("test rmse %.6g  mean latent variance %.6g  lengthscale %.6g\n", run.test_metrics.rmse,
                        run.test_metrics.mean_latent_variance, run.lengthscale);
        } else if (ts->parsed()) {
            if (!ts_common.config.empty()) {
                ts_opts = timeseries_options_from_json(read_json_file(ts_common.config), ts_opts);
            }
            for (auto& o : ts_overrides) o();
            if (act_opt->count() > 0) {
                try {
                    ts_opts.activation = parse_activation(activation_name);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }
            if (mode_opt->count() > 0) ts_opts.order_mode = parse_order_mode(order_mode_name);
            apply_common(ts_common, ts_opts);
            const TimeseriesRun run = run_timeseries(ts_opts);
            write_outputs(run, ts_common.out, seconds_since(start));
            std::printf("open-loop test rmse %.6g  mean latent variance %.6g\n", run.open_loop_both.rmse,
                        run.open_loop_both.mean_latent_variance);
            if (run.closed_loop) {
                std::printf("closed-loop test rmse %.6g  mean latent variance %.6g  max |x| %.6g\n",
                            run.closed_loop_both.rmse, run.closed_loop_both.mean_latent_variance,
                            run.closed_loop_max_abs_x);
            }
        } else if (plot->parsed()) {
            const fs::path report{report_path};
            const fs::path target = bands_out.empty() ? report.parent_path() / "bands.csv" : fs::path{bands_out};
            csv::write_file(target, plot_bands_csv(report, table_name));
            std::cout << target.string() << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "bwl: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "bwl: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
