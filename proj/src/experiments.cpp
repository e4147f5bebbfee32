#include "bwl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include "bwl/bayes.hpp"
#include "bwl/csv.hpp"
#include "bwl/dynamics.hpp"
#include "bwl/rng.hpp"

namespace bwl::bench {

namespace {

using csv::format_number;

Index grid_samples(double horizon, double dt) {
    return static_cast<Index>(std::llround(horizon / dt)) + 1;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

// FNV-1a over the bit patterns of a matrix, column-major.
std::string data_hash(const Matrix& values) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Index j = 0; j < values.cols(); ++j) {
        for (Index i = 0; i < values.rows(); ++i) {
            std::uint64_t bits = 0;
            const double v = values(i, j);
            std::memcpy(&bits, &v, sizeof bits);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
        }
    }
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
    return buffer;
}

Json metrics_json(const Metrics& m) {
    return Json{{"rmse", m.rmse}, {"mean_latent_variance", m.mean_latent_variance}, {"sample_count", m.sample_count}};
}

Json range_json(IndexRange r) { return Json::array({r.begin, r.end}); }

void write_json(const std::filesystem::path& path, const Json& j) {
    csv::write_file(path, j.dump(2) + "\n");
}

std::string region(const IndexRange& train, Index k) { return train.contains(k) ? "train" : "test"; }

std::string channel_name(const std::string& base, Index c, Index channels) {
    return channels == 1 ? base : base + std::to_string(c);
}

// Runs task(i) for i in [0, count) on up to `jobs` threads. Each task writes only its own slot.
template <typename Task>
void parallel_for(std::size_t count, int jobs, Task&& task) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace

// ---------------------------------------------------------------------------
// System identification

void SysidOptions::validate() const {
    require(order >= 1, "order must be at least 1");
    require(lambda > 0.0, "lambda must be positive");
    require(features >= 1, "features must be at least 1");
    require(noise_std >= 0.0, "noise_std must be non-negative");
    require(reg_sigma > 0.0, "reg_sigma must be positive");
    require(alpha > 0.0, "alpha must be positive");
    require(!lengthscale || *lengthscale > 0.0, "lengthscale must be positive");
    require(dt > 0.0 && horizon > 0.0, "horizon and dt must be positive");
    require(grid_samples(horizon, dt) >= 4, "horizon must span at least four samples");
    require(harmonics >= 1 && omega0 > 0.0, "Fourier input needs harmonics >= 1 and omega0 > 0");
    require(jobs >= 1, "jobs must be at least 1");
}

SysidRun run_sysid(const SysidOptions& options) {
    options.validate();
    const RngSeed seed{options.seed};
    const Index m = grid_samples(options.horizon, options.dt);

    SysidRun run;
    run.options = options;
    const auto spec = FourierInputSpec::with_random_phases(options.harmonics, options.omega0,
                                                           derive_seed(seed, stream::kPhases));
    run.phases = spec.phases;
    run.input = fourier_input(spec, m, options.dt);
    run.truth = simulate_forced_second_order(run.input, options.damping, options.stiffness, options.gain);
    run.observed = add_noise(run.truth, options.noise_std, derive_seed(seed, stream::kNoise));

    BWLConfig config;
    config.bank = {LaguerreConfig{options.order, options.lambda}};
    config.feature.kind = FeatureKind::RFF;
    config.feature.count = options.features;
    config.feature.lengthscale = options.lengthscale;
    config.feature.seed = derive_seed(seed, stream::kFeatures);
    config.noise = NoiseModel{options.reg_sigma, options.alpha};
    config.sample_dt = options.dt;

    run.train = IndexRange{0, m / 2};
    run.test = IndexRange{m / 2, m};
    const FittedBWL model = fit(config, run.input, run.observed, run.train);
    run.lengthscale = *model.config.feature.lengthscale;
    run.prediction = predict(model, run.input);
    run.train_metrics = evaluate(run.prediction, run.truth, run.train);
    run.test_metrics = evaluate(run.prediction, run.truth, run.test);
    run.test_rmse_observed = evaluate(run.prediction, run.observed, run.test).rmse;
    return run;
}

// ---------------------------------------------------------------------------
// Time series

void TimeseriesOptions::validate() const {
    require(order >= 1, "order must be at least 1");
    require(order_mode == OrderMode::PerChannel || order >= 2, "split order needs order >= 2");
    require(lambda > 0.0, "lambda must be positive");
    require(neurons >= 1, "neurons must be at least 1");
    require(noise_std >= 0.0, "noise_std must be non-negative");
    require(reg_sigma > 0.0, "reg_sigma must be positive");
    require(alpha > 0.0, "alpha must be positive");
    require(shift >= 1, "shift must be at least 1");
    require(dt > 0.0 && horizon > 0.0, "horizon and dt must be positive");
    require(grid_samples(horizon, dt) > shift + 4, "horizon too short for the shift");
    require(jobs >= 1, "jobs must be at least 1");
}

int TimeseriesOptions::order_per_channel() const {
    return order_mode == OrderMode::PerChannel ? order : order / 2;
}

TimeseriesRun run_timeseries(const TimeseriesOptions& options) {
    options.validate();
    const RngSeed seed{options.seed};
    const Index m = grid_samples(options.horizon, options.dt);

    TimeseriesRun run;
    run.options = options;
    run.clean = simulate_van_der_pol(options.mu, {options.x0, options.v0}, m, options.dt);
    run.observed = add_noise(run.clean, options.noise_std, derive_seed(seed, stream::kNoise));

    auto [input, target] = make_shifted_target(run.observed, options.shift);
    run.target_observed = target;
    run.target_truth = make_shifted_target(run.clean, options.shift).second;
    const Index n = input.samples();

    BWLConfig config;
    const LaguerreConfig channel{options.order_per_channel(), options.lambda};
    config.bank = {channel, channel};
    config.feature.kind = FeatureKind::ELM;
    config.feature.count = options.neurons;
    config.feature.activation = options.activation;
    config.feature.seed = derive_seed(seed, stream::kFeatures);
    config.noise = NoiseModel{options.reg_sigma, options.alpha};
    config.sample_dt = options.dt;

    run.train = IndexRange{0, n / 2};
    run.test = IndexRange{n / 2, n};
    const FittedBWL model = fit(config, input, target, run.train);
    run.open_loop = predict(model, input);
    run.open_loop_both = evaluate(run.open_loop, run.target_truth, run.test);
    run.train_both = evaluate(run.open_loop, run.target_truth, run.train);
    {
        PredictionResult x_only{run.open_loop.mean.col(0), run.open_loop.latent_variance,
                                run.open_loop.latent_plus_noise_variance};
        run.open_loop_x = evaluate(x_only, run.target_truth.channel(0), run.test);
    }

    if (options.shift == 1) {
        // Prefix: the observed training window; the rollout then covers the rest of the series.
        const Index split = run.train.end;
        const TrajectoryData prefix = run.observed.slice(0, split);
        const Index steps = m - split;
        run.closed_loop = rollout(model, prefix, steps);
        run.closed_loop_truth = run.clean.slice(split, steps);

        const double noise_var = options.reg_sigma * options.reg_sigma;
        PredictionResult closed{run.closed_loop->mean.values, run.closed_loop->latent_variance,
                                run.closed_loop->latent_variance.array() + noise_var};
        const IndexRange all{0, steps};
        run.closed_loop_both = evaluate(closed, run.closed_loop_truth, all);
        PredictionResult closed_x{closed.mean.col(0), closed.latent_variance, closed.latent_plus_noise_variance};
        run.closed_loop_x = evaluate(closed_x, run.closed_loop_truth.channel(0), all);
        run.closed_loop_max_abs_x = run.closed_loop->mean.values.col(0).cwiseAbs().maxCoeff();
    }
    return run;
}

// ---------------------------------------------------------------------------
// Tri-modal Gaussian benchmark

void BenchOptions::validate() const {
    require(!dims.empty(), "dims must not be empty");
    for (int d : dims) require(d >= 1 && d <= 5, "dims must lie in 1..5");
    require(samples >= 2, "samples must be at least 2");
    require(features >= 1, "features must be at least 1");
    require(repeats >= 1, "repeats must be at least 1");
    require(input_scale >= 0.0, "input_scale must be non-negative");
    require(rff_lengthscale > 0.0, "rff_lengthscale must be positive");
    require(ls_ridge >= 0.0, "ls_ridge must be non-negative");
    require(bayes_sigma > 0.0 && bayes_alpha > 0.0, "bayes_sigma and bayes_alpha must be positive");
    require(jobs >= 1, "jobs must be at least 1");
}

double BenchOptions::resolved_input_scale() const {
    return input_scale > 0.0 ? input_scale : 1.0 / std::sqrt(TrimodalSpec{}.covariance_scale);
}

const BenchSummary& BenchRun::at(int dim, FeatureKind model, FitMode fit) const {
    for (const auto& s : summary) {
        if (s.dim == dim && s.model == model && s.fit == fit) return s;
    }
    throw std::out_of_range("no benchmark summary for the requested cell");
}

std::pair<double, double> published_table_value(int dim, FeatureKind model) {
    struct Row {
        double rff_mean, rff_std, elm_mean, elm_std;
    };
    static constexpr Row rows[] = {
        {1.065e-7, 1.616e-4, 2.148e-7, 2.080e-4}, {6.341e-6, 4.865e-3, 6.168e-6, 4.210e-3},
        {4.018e-1, 4.466e-3, 1.697e-2, 9.304e-3}, {2.382e0, 3.922e-3, 7.872e-1, 4.131e-3},
        {1.435e0, 3.886e-3, 8.884e-1, 3.998e-3},
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (dim < 1 || dim > 5) return {nan, nan};
    const Row& r = rows[dim - 1];
    if (model == FeatureKind::RFF) return {r.rff_mean, r.rff_std};
    if (model == FeatureKind::ELM) return {r.elm_mean, r.elm_std};
    return {nan, nan};
}

namespace {

std::vector<FitMode> fit_modes(FitMode mode) {
    if (mode == FitMode::Both) return {FitMode::LeastSquares, FitMode::Bayes};
    return {mode};
}

// All cells of one (dimension, repeat): both models share the train and test samples.
std::vector<BenchCell> bench_task(const BenchOptions& o, int dim, int repeat) {
    TrimodalSpec spec;
    spec.dim = dim;
    const RngSeed cell_seed =
        derive_seed(derive_seed(RngSeed{o.seed}, stream::kRepeat + static_cast<std::uint64_t>(repeat)),
                    static_cast<std::uint64_t>(dim));
    const Matrix train_x = sample_domain(spec, o.samples, derive_seed(cell_seed, stream::kTrainSample));
    const Matrix test_x = sample_domain(spec, o.samples, derive_seed(cell_seed, stream::kTestSample));
    Vector train_y(o.samples), test_y(o.samples);
    for (Index j = 0; j < o.samples; ++j) {
        train_y(j) = trimodal_gaussian(spec, train_x.row(j).transpose());
        test_y(j) = trimodal_gaussian(spec, test_x.row(j).transpose());
    }
    // Targets are fitted in units of their training RMS.
    const double target_scale = std::sqrt(train_y.squaredNorm() / static_cast<double>(o.samples));
    const Matrix scaled_y = train_y / target_scale;
    const double input_scale = o.resolved_input_scale();
    const double test_power = test_y.squaredNorm() / static_cast<double>(o.samples);

    std::vector<BenchCell> cells;
    for (FeatureKind kind : {FeatureKind::RFF, FeatureKind::ELM}) {
        const RngSeed feature_seed =
            derive_seed(cell_seed, stream::kFeatures + (kind == FeatureKind::ELM ? 100U : 0U));
        const FeatureMap map = kind == FeatureKind::RFF
                                   ? sample_rff(o.features, dim, o.rff_lengthscale, feature_seed)
                                   : sample_elm(o.features, dim, o.elm_activation, feature_seed);
        const Matrix phi_train = evaluate_features(map, train_x * input_scale);
        const Matrix phi_test = evaluate_features(map, test_x * input_scale);
        for (FitMode mode : fit_modes(o.fit)) {
            Matrix weights;
            if (mode == FitMode::LeastSquares) {
                weights = fit_least_squares(phi_train, scaled_y, o.ls_ridge);
            } else {
                weights = fit_posterior(phi_train, scaled_y, NoiseModel{o.bayes_sigma, o.bayes_alpha}).mean();
            }
            const Vector prediction = (phi_test * weights).col(0) * target_scale;
            const double mse = (prediction - test_y).squaredNorm() / static_cast<double>(o.samples);
            cells.push_back(BenchCell{dim, kind, mode, repeat, mse / test_power, mse});
        }
    }
    return cells;
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

} // namespace

BenchRun run_bench_gaussian(const BenchOptions& options) {
    options.validate();
    BenchRun run;
    run.options = options;

    struct Task {
        int dim;
        int repeat;
    };
    std::vector<Task> tasks;
    for (int d : options.dims) {
        for (int r = 0; r < options.repeats; ++r) tasks.push_back({d, r});
    }
    std::vector<std::vector<BenchCell>> results(tasks.size());
    parallel_for(tasks.size(), options.jobs,
                 [&](std::size_t i) { results[i] = bench_task(options, tasks[i].dim, tasks[i].repeat); });
    for (auto& r : results) run.cells.insert(run.cells.end(), r.begin(), r.end());

    for (int d : options.dims) {
        for (FeatureKind kind : {FeatureKind::RFF, FeatureKind::ELM}) {
            for (FitMode mode : fit_modes(options.fit)) {
                std::vector<double> rel, raw;
                for (const auto& c : run.cells) {
                    if (c.dim == d && c.model == kind && c.fit == mode) {
                        rel.push_back(c.relative_mse);
                        raw.push_back(c.mse);
                    }
                }
                const auto [rel_mean, rel_std] = mean_and_std(rel);
                const auto [raw_mean, raw_std] = mean_and_std(raw);
                run.summary.push_back(BenchSummary{d, kind, mode, rel_mean, rel_std, raw_mean, raw_std});
            }
        }
    }
    return run;
}

// ---------------------------------------------------------------------------
// Names

std::string to_string(FitMode mode) {
    switch (mode) {
    case FitMode::LeastSquares: return "ls";
    case FitMode::Bayes: return "bayes";
    case FitMode::Both: return "both";
    }
    return "unknown";
}

FitMode parse_fit_mode(const std::string& name) {
    if (name == "ls") return FitMode::LeastSquares;
    if (name == "bayes") return FitMode::Bayes;
    if (name == "both") return FitMode::Both;
    throw ConfigError("fit must be one of ls, bayes, both (got '" + name + "')");
}

std::string to_string(OrderMode mode) { return mode == OrderMode::PerChannel ? "per-channel" : "split"; }

OrderMode parse_order_mode(const std::string& name) {
    if (name == "per-channel") return OrderMode::PerChannel;
    if (name == "split") return OrderMode::Split;
    throw ConfigError("order_mode must be per-channel or split (got '" + name + "')");
}

// ---------------------------------------------------------------------------
// JSON configuration

namespace {

template <typename T>
T get_as(const Json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config field '" + key + "' has the wrong type");
    }
}

void check_command(const Json& config, const std::string& expected) {
    require(config.is_object(), "config must be a JSON object");
    if (config.contains("command")) {
        require(get_as<std::string>(config["command"], "command") == expected,
                "config is for command '" + config["command"].dump() + "', not '" + expected + "'");
    }
}

[[noreturn]] void unknown_field(const std::string& key) {
    throw ConfigError("unknown config field '" + key + "'");
}

} // namespace

Json to_json(const SysidOptions& o) {
    return Json{{"command", "sysid"},
                {"order", o.order},
                {"lambda", o.lambda},
                {"features", o.features},
                {"noise_std", o.noise_std},
                {"reg_sigma", o.reg_sigma},
                {"alpha", o.alpha},
                {"lengthscale", o.lengthscale ? Json(*o.lengthscale) : Json("median")},
                {"horizon", o.horizon},
                {"dt", o.dt},
                {"harmonics", o.harmonics},
                {"omega0", o.omega0},
                {"damping", o.damping},
                {"stiffness", o.stiffness},
                {"gain", o.gain},
                {"seed", o.seed},
                {"jobs", o.jobs}};
}

SysidOptions sysid_options_from_json(const Json& config, SysidOptions o) {
    check_command(config, "sysid");
    for (const auto& [key, value] : config.items()) {
        if (key == "command" || key == "resolved_lengthscale") continue;
        else if (key == "order") o.order = get_as<int>(value, key);
        else if (key == "lambda") o.lambda = get_as<double>(value, key);
        else if (key == "features") o.features = get_as<Index>(value, key);
        else if (key == "noise_std") o.noise_std = get_as<double>(value, key);
        else if (key == "reg_sigma") o.reg_sigma = get_as<double>(value, key);
        else if (key == "alpha") o.alpha = get_as<double>(value, key);
        else if (key == "lengthscale") {
            if (value.is_string()) {
                require(value.get<std::string>() == "median", "lengthscale must be \"median\" or a number");
                o.lengthscale.reset();
            } else {
                o.lengthscale = get_as<double>(value, key);
            }
        }
        else if (key == "horizon") o.horizon = get_as<double>(value, key);
        else if (key == "dt") o.dt = get_as<double>(value, key);
        else if (key == "harmonics") o.harmonics = get_as<int>(value, key);
        else if (key == "omega0") o.omega0 = get_as<double>(value, key);
        else if (key == "damping") o.damping = get_as<double>(value, key);
        else if (key == "stiffness") o.stiffness = get_as<double>(value, key);
        else if (key == "gain") o.gain = get_as<double>(value, key);
        else if (key == "seed") o.seed = get_as<std::uint64_t>(value, key);
        else if (key == "jobs") o.jobs = get_as<int>(value, key);
        else unknown_field(key);
    }
    o.validate();
    return o;
}

Json to_json(const TimeseriesOptions& o) {
    return Json{{"command", "timeseries"},
                {"order", o.order},
                {"order_mode", to_string(o.order_mode)},
                {"lambda", o.lambda},
                {"neurons", o.neurons},
                {"activation", std::string(to_string(o.activation))},
                {"noise_std", o.noise_std},
                {"reg_sigma", o.reg_sigma},
                {"alpha", o.alpha},
                {"mu", o.mu},
                {"x0", o.x0},
                {"v0", o.v0},
                {"shift", o.shift},
                {"horizon", o.horizon},
                {"dt", o.dt},
                {"seed", o.seed},
                {"jobs", o.jobs}};
}

TimeseriesOptions timeseries_options_from_json(const Json& config, TimeseriesOptions o) {
    check_command(config, "timeseries");
    for (const auto& [key, value] : config.items()) {
        if (key == "command") continue;
        else if (key == "order") o.order = get_as<int>(value, key);
        else if (key == "order_mode") o.order_mode = parse_order_mode(get_as<std::string>(value, key));
        else if (key == "lambda") o.lambda = get_as<double>(value, key);
        else if (key == "neurons") o.neurons = get_as<Index>(value, key);
        else if (key == "activation") {
            try {
                o.activation = parse_activation(get_as<std::string>(value, key));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        else if (key == "noise_std") o.noise_std = get_as<double>(value, key);
        else if (key == "reg_sigma") o.reg_sigma = get_as<double>(value, key);
        else if (key == "alpha") o.alpha = get_as<double>(value, key);
        else if (key == "mu") o.mu = get_as<double>(value, key);
        else if (key == "x0") o.x0 = get_as<double>(value, key);
        else if (key == "v0") o.v0 = get_as<double>(value, key);
        else if (key == "shift") o.shift = get_as<int>(value, key);
        else if (key == "horizon") o.horizon = get_as<double>(value, key);
        else if (key == "dt") o.dt = get_as<double>(value, key);
        else if (key == "seed") o.seed = get_as<std::uint64_t>(value, key);
        else if (key == "jobs") o.jobs = get_as<int>(value, key);
        else unknown_field(key);
    }
    o.validate();
    return o;
}

Json to_json(const BenchOptions& o) {
    return Json{{"command", "bench-gaussian"},
                {"dims", o.dims},
                {"samples", o.samples},
                {"features", o.features},
                {"repeats", o.repeats},
                {"fit", to_string(o.fit)},
                {"input_scale", o.resolved_input_scale()},
                {"rff_lengthscale", o.rff_lengthscale},
                {"elm_activation", std::string(to_string(o.elm_activation))},
                {"ls_ridge", o.ls_ridge},
                {"bayes_sigma", o.bayes_sigma},
                {"bayes_alpha", o.bayes_alpha},
                {"seed", o.seed},
                {"jobs", o.jobs}};
}

BenchOptions bench_options_from_json(const Json& config, BenchOptions o) {
    check_command(config, "bench-gaussian");
    for (const auto& [key, value] : config.items()) {
        if (key == "command") continue;
        else if (key == "dims") o.dims = get_as<std::vector<int>>(value, key);
        else if (key == "samples") o.samples = get_as<Index>(value, key);
        else if (key == "features") o.features = get_as<Index>(value, key);
        else if (key == "repeats") o.repeats = get_as<int>(value, key);
        else if (key == "fit") o.fit = parse_fit_mode(get_as<std::string>(value, key));
        else if (key == "input_scale") o.input_scale = get_as<double>(value, key);
        else if (key == "rff_lengthscale") o.rff_lengthscale = get_as<double>(value, key);
        else if (key == "elm_activation") {
            try {
                o.elm_activation = parse_activation(get_as<std::string>(value, key));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        else if (key == "ls_ridge") o.ls_ridge = get_as<double>(value, key);
        else if (key == "bayes_sigma") o.bayes_sigma = get_as<double>(value, key);
        else if (key == "bayes_alpha") o.bayes_alpha = get_as<double>(value, key);
        else if (key == "seed") o.seed = get_as<std::uint64_t>(value, key);
        else if (key == "jobs") o.jobs = get_as<int>(value, key);
        else unknown_field(key);
    }
    o.validate();
    return o;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Tables

std::string samples_csv(const SysidRun& run) {
    std::string out = "time,region,input,truth,observed,mean,latent_variance,latent_plus_noise_variance\n";
    const auto& p = run.prediction;
    for (Index k = 0; k < run.input.samples(); ++k) {
        out += format_number(run.input.time(k)) + ',' + region(run.train, k) + ',' +
               format_number(run.input.values(k, 0)) + ',' + format_number(run.truth.values(k, 0)) + ',' +
               format_number(run.observed.values(k, 0)) + ',' + format_number(p.mean(k, 0)) + ',' +
               format_number(p.latent_variance(k)) + ',' + format_number(p.latent_plus_noise_variance(k)) + '\n';
    }
    return out;
}

std::string samples_csv(const TimeseriesRun& run) {
    const Index channels = run.target_truth.channels();
    std::string out = "time,region";
    for (const char* base : {"truth", "observed", "mean"}) {
        for (Index c = 0; c < channels; ++c) out += ',' + channel_name(base, c, channels);
    }
    out += ",latent_variance,latent_plus_noise_variance\n";
    const auto& p = run.open_loop;
    for (Index k = 0; k < run.target_truth.samples(); ++k) {
        out += format_number(run.target_truth.time(k)) + ',' + region(run.train, k);
        for (Index c = 0; c < channels; ++c) out += ',' + format_number(run.target_truth.values(k, c));
        for (Index c = 0; c < channels; ++c) out += ',' + format_number(run.target_observed.values(k, c));
        for (Index c = 0; c < channels; ++c) out += ',' + format_number(p.mean(k, c));
        out += ',' + format_number(p.latent_variance(k)) + ',' + format_number(p.latent_plus_noise_variance(k)) + '\n';
    }
    return out;
}

std::string rollout_csv(const TimeseriesRun& run) {
    if (!run.closed_loop) return {};
    const auto& r = *run.closed_loop;
    const Index channels = r.mean.channels();
    const double noise_var = run.options.reg_sigma * run.options.reg_sigma;
    std::string out = "time,region";
    for (const char* base : {"truth", "mean"}) {
        for (Index c = 0; c < channels; ++c) out += ',' + channel_name(base, c, channels);
    }
    out += ",latent_variance,latent_plus_noise_variance\n";
    for (Index k = 0; k < r.mean.samples(); ++k) {
        out += format_number(r.mean.time(k)) + ",test";
        for (Index c = 0; c < channels; ++c) out += ',' + format_number(run.closed_loop_truth.values(k, c));
        for (Index c = 0; c < channels; ++c) out += ',' + format_number(r.mean.values(k, c));
        out += ',' + format_number(r.latent_variance(k)) + ',' + format_number(r.latent_variance(k) + noise_var) + '\n';
    }
    return out;
}

std::string table1_csv(const BenchRun& run) {
    std::string out = "d,model,fit,rel_mse_mean,rel_mse_std,mse_mean,mse_std,published_mean,published_std\n";
    for (const auto& s : run.summary) {
        const auto [published_mean, published_std] = published_table_value(s.dim, s.model);
        out += std::to_string(s.dim) + ',' + std::string(to_string(s.model)) + ',' + to_string(s.fit) + ',' +
               format_number(s.relative_mse_mean) + ',' + format_number(s.relative_mse_std) + ',' +
               format_number(s.mse_mean) + ',' + format_number(s.mse_std) + ',' + format_number(published_mean) + ',' +
               format_number(published_std) + '\n';
    }
    return out;
}

std::string bench_runs_csv(const BenchRun& run) {
    std::string out = "d,model,fit,repeat,rel_mse,mse\n";
    for (const auto& c : run.cells) {
        out += std::to_string(c.dim) + ',' + std::string(to_string(c.model)) + ',' + to_string(c.fit) + ',' +
               std::to_string(c.repeat) + ',' + format_number(c.relative_mse) + ',' + format_number(c.mse) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Artifacts

void write_outputs(const SysidRun& run, const std::filesystem::path& out_dir, double seconds) {
    std::filesystem::create_directories(out_dir);
    const Json config = to_json(run.options);
    Json resolved = config;
    resolved["resolved_lengthscale"] = run.lengthscale;

    Json report{
        {"command", "sysid"},
        {"rng", std::string(kRngVersion)},
        {"seed", run.options.seed},
        {"config", config},
        {"resolved", {{"lengthscale", run.lengthscale}, {"phases", run.phases}}},
        {"feature_map",
         {{"kind", "rff"},
          {"features", run.options.features},
          {"input_dim", run.options.order},
          {"seed", derive_seed(RngSeed{run.options.seed}, stream::kFeatures).value},
          {"lengthscale", run.lengthscale}}},
        {"posterior",
         {{"alpha", run.options.alpha},
          {"sigma", run.options.reg_sigma},
          {"features", run.options.features},
          {"data_hash", data_hash(run.observed.values.topRows(run.train.end))}}},
        {"masks", {{"train", range_json(run.train)}, {"test", range_json(run.test)}}},
        {"metrics",
         {{"test", metrics_json(run.test_metrics)},
          {"train", metrics_json(run.train_metrics)},
          {"test_rmse_observed", run.test_rmse_observed}}},
        {"reference", {{"test_rmse", 0.07620}, {"mean_variance", 0.01519}}},
        {"tables", {{"samples", "samples.csv"}}},
        {"duration_seconds", seconds},
    };
    csv::write_file(out_dir / "samples.csv", samples_csv(run));
    write_json(out_dir / "resolved_config.json", resolved);
    write_json(out_dir / "report.json", report);
}

void write_outputs(const TimeseriesRun& run, const std::filesystem::path& out_dir, double seconds) {
    std::filesystem::create_directories(out_dir);
    const Json config = to_json(run.options);
    const Index latent_dim = 2 * run.options.order_per_channel();
    Json metrics{{"open_loop", {{"both", metrics_json(run.open_loop_both)}, {"x", metrics_json(run.open_loop_x)}}},
                 {"train_open_loop", metrics_json(run.train_both)}};
    Json tables{{"samples", "samples.csv"}};
    if (run.closed_loop) {
        metrics["closed_loop"] = {{"both", metrics_json(run.closed_loop_both)},
                                  {"x", metrics_json(run.closed_loop_x)},
                                  {"max_abs_x", run.closed_loop_max_abs_x}};
        tables["rollout"] = "rollout.csv";
    }
    Json report{
        {"command", "timeseries"},
        {"rng", std::string(kRngVersion)},
        {"seed", run.options.seed},
        {"config", config},
        {"resolved", {{"order_per_channel", run.options.order_per_channel()}, {"latent_dim", latent_dim}}},
        {"feature_map",
         {{"kind", "elm"},
          {"features", run.options.neurons},
          {"input_dim", latent_dim},
          {"seed", derive_seed(RngSeed{run.options.seed}, stream::kFeatures).value},
          {"activation", std::string(to_string(run.options.activation))}}},
        {"posterior",
         {{"alpha", run.options.alpha},
          {"sigma", run.options.reg_sigma},
          {"features", run.options.neurons},
          {"data_hash", data_hash(run.target_observed.values.topRows(run.train.end))}}},
        {"masks", {{"train", range_json(run.train)}, {"test", range_json(run.test)}}},
        {"metrics", metrics},
        {"reference", {{"test_rmse", 0.9577}, {"mean_variance", 0.00234}}},
        {"tables", tables},
        {"duration_seconds", seconds},
    };
    csv::write_file(out_dir / "samples.csv", samples_csv(run));
    if (run.closed_loop) csv::write_file(out_dir / "rollout.csv", rollout_csv(run));
    write_json(out_dir / "resolved_config.json", config);
    write_json(out_dir / "report.json", report);
}

void write_outputs(const BenchRun& run, const std::filesystem::path& out_dir, double seconds) {
    std::filesystem::create_directories(out_dir);
    const Json config = to_json(run.options);
    Json summary = Json::array();
    for (const auto& s : run.summary) {
        summary.push_back({{"d", s.dim},
                           {"model", std::string(to_string(s.model))},
                           {"fit", to_string(s.fit)},
                           {"rel_mse_mean", s.relative_mse_mean},
                           {"rel_mse_std", s.relative_mse_std},
                           {"mse_mean", s.mse_mean},
                           {"mse_std", s.mse_std}});
    }
    Json report{{"command", "bench-gaussian"},
                {"rng", std::string(kRngVersion)},
                {"seed", run.options.seed},
                {"config", config},
                {"metric", "relative test MSE: mean squared error over an independent uniform sample "
                           "divided by the mean squared target on that sample"},
                {"summary", summary},
                {"tables", {{"table1", "table1.csv"}, {"runs", "runs.csv"}}},
                {"duration_seconds", seconds}};
    csv::write_file(out_dir / "table1.csv", table1_csv(run));
    csv::write_file(out_dir / "runs.csv", bench_runs_csv(run));
    write_json(out_dir / "resolved_config.json", config);
    write_json(out_dir / "report.json", report);
}

std::string plot_bands_csv(const std::filesystem::path& report_path, const std::string& table) {
    if (!std::filesystem::exists(report_path)) {
        throw ConfigError("report not found: " + report_path.string());
    }
    const Json report = read_json_file(report_path);
    if (!report.contains("tables") || !report["tables"].contains(table)) {
        throw ConfigError("report has no '" + table + "' table");
    }
    const auto csv_path = report_path.parent_path() / report["tables"][table].get<std::string>();
    const csv::Table data = csv::read_file(csv_path);

    // Channels are the suffixes shared by truth*/mean* columns.
    std::vector<std::string> suffixes;
    for (const auto& h : data.header) {
        if (h.rfind("mean", 0) == 0 && data.has_column("truth" + h.substr(4))) suffixes.push_back(h.substr(4));
    }
    if (suffixes.empty()) throw ConfigError("table has no truth/mean columns");
    const std::size_t time_col = data.column("time");
    const std::size_t var_col = data.column("latent_variance");

    std::string out = "time";
    for (const auto& s : suffixes) out += ",truth" + s + ",mean" + s + ",lower" + s + ",upper" + s;
    out += '\n';
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        const double sd = std::sqrt(std::max(0.0, data.number(r, var_col)));
        out += format_number(data.number(r, time_col));
        for (const auto& s : suffixes) {
            const double mean = data.number(r, data.column("mean" + s));
            out += ',' + format_number(data.number(r, data.column("truth" + s))) + ',' + format_number(mean) + ',' +
                   format_number(mean - 2.0 * sd) + ',' + format_number(mean + 2.0 * sd);
        }
        out += '\n';
    }
    return out;
}

} // namespace bwl::bench
