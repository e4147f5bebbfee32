#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwl/features.hpp"
#include "bwl/model.hpp"
#include "bwl/trajectory.hpp"

namespace bwl::bench {

using Json = nlohmann::ordered_json;

/// Invalid or unknown configuration entries.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// System identification: Fourier-forced second-order system, Bayesian RFF model.

struct SysidOptions {
    int order = 15;
    double lambda = 30.0;
    Index features = 1000;
    double noise_std = 0.02;  // observation noise added to the simulated output
    double reg_sigma = 1.0;   // noise std assumed by the regression
    double alpha = 0.08;      // prior precision of the output weights
    std::optional<double> lengthscale; // empty: median heuristic
    double horizon = 50.0;
    double dt = 0.01;
    int harmonics = 5;
    double omega0 = 1.0;
    double damping = 0.8;
    double stiffness = 4.0;
    double gain = 1.2;
    std::uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
};

struct SysidRun {
    SysidOptions options;
    std::vector<double> phases;
    double lengthscale = 0.0;
    TrajectoryData input;
    TrajectoryData truth;
    TrajectoryData observed;
    PredictionResult prediction;
    IndexRange train;
    IndexRange test;
    Metrics train_metrics;
    Metrics test_metrics;
    double test_rmse_observed = 0.0;
};

[[nodiscard]] SysidRun run_sysid(const SysidOptions& options);

// ---------------------------------------------------------------------------
// Time series: noisy Van der Pol series, one-step-shift Bayesian ELM model.

enum class OrderMode { PerChannel, Split };

struct TimeseriesOptions {
    int order = 50;
    OrderMode order_mode = OrderMode::PerChannel; // Split: order/2 per channel
    double lambda = 3.0;
    Index neurons = 2000;
    Activation activation = Activation::Tanh;
    double noise_std = 0.1;
    double reg_sigma = 1.0;
    double alpha = 0.5;
    double mu = 2.0;
    double x0 = 2.0;
    double v0 = 0.0;
    int shift = 1;
    double horizon = 40.0;
    double dt = 0.01;
    std::uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
    [[nodiscard]] int order_per_channel() const;
};

struct TimeseriesRun {
    TimeseriesOptions options;
    TrajectoryData clean;
    TrajectoryData observed;
    TrajectoryData target_truth;    // clean series shifted by `shift`
    TrajectoryData target_observed; // noisy series shifted by `shift`
    PredictionResult open_loop;
    IndexRange train;
    IndexRange test;
    Metrics open_loop_both;
    Metrics open_loop_x;
    Metrics train_both;
    // Closed loop; present only for shift == 1.
    std::optional<RolloutResult> closed_loop;
    TrajectoryData closed_loop_truth;
    Metrics closed_loop_both;
    Metrics closed_loop_x;
    double closed_loop_max_abs_x = 0.0;
};

[[nodiscard]] TimeseriesRun run_timeseries(const TimeseriesOptions& options);

// ---------------------------------------------------------------------------
// Tri-modal Gaussian benchmark (RFF and ELM on random samples of the domain box).

enum class FitMode { LeastSquares, Bayes, Both };

struct BenchOptions {
    std::vector<int> dims{1, 2, 3, 4, 5};
    Index samples = 2000;
    Index features = 1500;
    int repeats = 20;
    FitMode fit = FitMode::Both;
    /// Inputs are multiplied by this before feature evaluation; 0 selects
    /// 1/sqrt(covariance scale), i.e. coordinates in units of the mode width.
    double input_scale = 0.0;
    double rff_lengthscale = 1.0; // in scaled units
    Activation elm_activation = Activation::Tanh;
    double ls_ridge = 1e-8;
    double bayes_sigma = 1e-3;
    double bayes_alpha = 1.0;
    std::uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
    [[nodiscard]] double resolved_input_scale() const;
};

/// Error of one (dimension, model, fit, repeat) cell. Relative MSE is the test MSE divided by
/// the mean squared target over the same test sample.
struct BenchCell {
    int dim = 0;
    FeatureKind model = FeatureKind::RFF;
    FitMode fit = FitMode::LeastSquares;
    int repeat = 0;
    double relative_mse = 0.0;
    double mse = 0.0;
};

struct BenchSummary {
    int dim = 0;
    FeatureKind model = FeatureKind::RFF;
    FitMode fit = FitMode::LeastSquares;
    double relative_mse_mean = 0.0;
    double relative_mse_std = 0.0;
    double mse_mean = 0.0;
    double mse_std = 0.0;
};

struct BenchRun {
    BenchOptions options;
    std::vector<BenchCell> cells;
    std::vector<BenchSummary> summary;

    /// Summary row for (dim, model, fit); throws std::out_of_range when absent.
    [[nodiscard]] const BenchSummary& at(int dim, FeatureKind model, FitMode fit) const;
};

[[nodiscard]] BenchRun run_bench_gaussian(const BenchOptions& options);

/// Reference mean/std of the published table for (dim, model); NaN when not tabulated.
[[nodiscard]] std::pair<double, double> published_table_value(int dim, FeatureKind model);

// ---------------------------------------------------------------------------
// Configuration (flat JSON, unknown fields rejected) and artifacts.

[[nodiscard]] Json to_json(const SysidOptions& options);
[[nodiscard]] Json to_json(const TimeseriesOptions& options);
[[nodiscard]] Json to_json(const BenchOptions& options);

/// Overlays the fields of `config` on `base`.
[[nodiscard]] SysidOptions sysid_options_from_json(const Json& config, SysidOptions base = {});
[[nodiscard]] TimeseriesOptions timeseries_options_from_json(const Json& config, TimeseriesOptions base = {});
[[nodiscard]] BenchOptions bench_options_from_json(const Json& config, BenchOptions base = {});

[[nodiscard]] Json read_json_file(const std::filesystem::path& path);

[[nodiscard]] std::string to_string(FitMode mode);
[[nodiscard]] FitMode parse_fit_mode(const std::string& name);
[[nodiscard]] std::string to_string(OrderMode mode);
[[nodiscard]] OrderMode parse_order_mode(const std::string& name);

/// Per-sample tables.
[[nodiscard]] std::string samples_csv(const SysidRun& run);
[[nodiscard]] std::string samples_csv(const TimeseriesRun& run);
[[nodiscard]] std::string rollout_csv(const TimeseriesRun& run);
[[nodiscard]] std::string table1_csv(const BenchRun& run);
[[nodiscard]] std::string bench_runs_csv(const BenchRun& run);

/// Writes report.json, resolved_config.json and the CSV tables into `out_dir`.
/// `seconds` is the wall-clock duration recorded in the report.
void write_outputs(const SysidRun& run, const std::filesystem::path& out_dir, double seconds);
void write_outputs(const TimeseriesRun& run, const std::filesystem::path& out_dir, double seconds);
void write_outputs(const BenchRun& run, const std::filesystem::path& out_dir, double seconds);

/// Reads the report at `report_path` and the per-sample table it names (`table`, e.g.
/// "samples" or "rollout"), returning a CSV of time, truth, mean, mean - 2 sd, mean + 2 sd
/// per output channel.
[[nodiscard]] std::string plot_bands_csv(const std::filesystem::path& report_path, const std::string& table = "samples");

} // namespace bwl::bench
