#include "bwl/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bwl {

void BWLConfig::validate() const {
    if (bank.empty()) throw std::invalid_argument("model needs at least one Laguerre channel");
    for (const auto& c : bank) c.validate();
    if (feature.kind != FeatureKind::PassThrough && feature.count < 1) {
        throw std::invalid_argument("model needs at least one feature");
    }
    if (feature.lengthscale && !(*feature.lengthscale > 0.0)) {
        throw std::invalid_argument("RFF lengthscale must be positive");
    }
    noise.validate();
    if (!(sample_dt > 0.0)) throw std::invalid_argument("sample period must be positive");
}

Matrix build_latents(const BWLConfig& config, const TrajectoryData& u) {
    config.validate();
    return filter_signal(LaguerreBank(config.bank, config.sample_dt), u);
}

double median_pairwise_distance(const Matrix& rows, Index max_rows) {
    if (rows.rows() < 2) throw std::invalid_argument("median_pairwise_distance: need at least two rows");
    const Index stride = std::max<Index>(1, (rows.rows() + max_rows - 1) / max_rows);
    std::vector<Index> picked;
    for (Index r = 0; r < rows.rows(); r += stride) picked.push_back(r);
    std::vector<double> distances;
    distances.reserve(picked.size() * (picked.size() - 1) / 2);
    for (std::size_t i = 0; i < picked.size(); ++i) {
        for (std::size_t j = i + 1; j < picked.size(); ++j) {
            distances.push_back((rows.row(picked[i]) - rows.row(picked[j])).norm());
        }
    }
    const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
    std::nth_element(distances.begin(), mid, distances.end());
    double median = *mid;
    if (distances.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(distances.begin(), mid));
    }
    return median;
}

namespace {

void check_mask(IndexRange mask, Index rows) {
    if (mask.empty()) throw std::invalid_argument("index mask is empty");
    if (mask.begin < 0 || mask.end > rows) throw std::out_of_range("index mask exceeds the trajectory");
}

// Targets may sit k samples later (shifted series); counts and spacing must agree.
void check_grid(const TrajectoryData& u, const TrajectoryData& z) {
    if (u.samples() != z.samples() || std::abs(u.dt - z.dt) > 1e-12 * u.dt) {
        throw std::invalid_argument("input and target trajectories are on different grids");
    }
}

} // namespace

FittedBWL fit_with_map(const BWLConfig& config, FeatureMap map, const TrajectoryData& u, const TrajectoryData& z,
                       IndexRange train_mask) {
    config.validate();
    check_grid(u, z);
    check_mask(train_mask, u.samples());
    LaguerreBank bank(config.bank, config.sample_dt);
    if (map.input_dim() != bank.total_order()) {
        throw std::invalid_argument("feature map input dimension must equal the Laguerre total order");
    }
    const Matrix latents = filter_signal(bank, u);
    const Matrix phi = evaluate_features(map, latents.middleRows(train_mask.begin, train_mask.size()));
    GaussianPosterior posterior =
        fit_posterior(phi, z.values.middleRows(train_mask.begin, train_mask.size()), config.noise);
    return FittedBWL{config, std::move(bank), std::move(map), std::move(posterior), train_mask};
}

FittedBWL fit(const BWLConfig& config, const TrajectoryData& u, const TrajectoryData& z, IndexRange train_mask) {
    config.validate();
    check_mask(train_mask, u.samples());
    BWLConfig resolved = config;
    const Index total_order = [&] {
        Index n = 0;
        for (const auto& c : config.bank) n += c.order;
        return n;
    }();

    switch (config.feature.kind) {
    case FeatureKind::RFF: {
        if (!resolved.feature.lengthscale) {
            const Matrix latents = build_latents(config, u);
            resolved.feature.lengthscale =
                median_pairwise_distance(latents.middleRows(train_mask.begin, train_mask.size()));
        }
        auto map = sample_rff(config.feature.count, total_order, *resolved.feature.lengthscale, config.feature.seed);
        return fit_with_map(resolved, std::move(map), u, z, train_mask);
    }
    case FeatureKind::ELM: {
        auto map = sample_elm(config.feature.count, total_order, config.feature.activation, config.feature.seed);
        return fit_with_map(resolved, std::move(map), u, z, train_mask);
    }
    case FeatureKind::PassThrough:
        resolved.feature.count = total_order;
        return fit_with_map(resolved, pass_through_map(total_order), u, z, train_mask);
    case FeatureKind::Atomic:
        break;
    }
    throw std::invalid_argument("atomic feature maps carry explicit weights; use fit_with_map");
}

PredictionResult predict(const FittedBWL& model, const TrajectoryData& u) {
    const Matrix latents = filter_signal(model.bank, u);
    const Matrix phi = evaluate_features(model.feature_map, latents);
    BatchPrediction batch = predict_batch(model.posterior, phi);
    const double noise_var = model.posterior.noise().sigma * model.posterior.noise().sigma;
    PredictionResult out;
    out.mean = std::move(batch.mean);
    out.latent_plus_noise_variance = batch.variance.array() + noise_var;
    out.latent_variance = std::move(batch.variance);
    return out;
}

std::pair<TrajectoryData, TrajectoryData> make_shifted_target(const TrajectoryData& series, Index k) {
    if (k < 1) throw std::invalid_argument("shift must be a positive number of samples");
    if (series.samples() <= k) throw std::invalid_argument("series too short for the requested shift");
    const Index n = series.samples() - k;
    return {TrajectoryData(series.t0, series.dt, series.values.topRows(n)),
            TrajectoryData(series.time(k), series.dt, series.values.bottomRows(n))};
}

RolloutResult rollout(const FittedBWL& model, const TrajectoryData& series_prefix, Index steps,
                      const TrajectoryData* feedback) {
    if (steps < 1) throw std::invalid_argument("rollout needs at least one step");
    const Index channels = model.bank.channel_count();
    if (model.posterior.output_count() != channels) {
        throw std::invalid_argument("rollout requires a model whose outputs are its own inputs");
    }
    if (series_prefix.channels() != channels) throw std::invalid_argument("rollout prefix has the wrong channel count");
    const Index n = series_prefix.samples();
    if (n < 1) throw std::invalid_argument("rollout needs a non-empty prefix");
    if (feedback && (feedback->channels() != channels || feedback->samples() < n + steps - 1)) {
        throw std::invalid_argument("rollout feedback signal is too short");
    }

    // Filtering prefix rows [0, n-1) yields the state that predicts sample n.
    Vector state = Vector::Zero(model.bank.total_order());
    std::vector<double> input(static_cast<std::size_t>(channels));
    auto advance = [&](const double* row_major_sample) {
        input.assign(row_major_sample, row_major_sample + channels);
        model.bank.step(state, input);
    };
    Vector sample(channels);
    for (Index k = 0; k + 1 < n; ++k) {
        sample = series_prefix.values.row(k).transpose();
        advance(sample.data());
    }

    RolloutResult out{TrajectoryData(series_prefix.time(n), series_prefix.dt, Matrix(steps, channels)), Vector(steps)};
    Vector phi(model.feature_map.feature_count());
    Vector mean(channels);
    for (Index s = 0; s < steps; ++s) {
        model.feature_map.evaluate_row(state.data(), phi.data());
        model.posterior.mean_row(phi.data(), mean.data());
        out.mean.values.row(s) = mean.transpose();
        out.latent_variance(s) = model.posterior.latent_variance(phi);

        // Input sample n-1+s: the last prefix row, then predictions (or the feedback signal).
        if (s == 0) {
            sample = series_prefix.values.row(n - 1).transpose();
        } else if (feedback) {
            sample = feedback->values.row(n - 1 + s).transpose();
        } else {
            sample = out.mean.values.row(s - 1).transpose();
        }
        advance(sample.data());
    }
    return out;
}

Metrics evaluate(const PredictionResult& pred, const TrajectoryData& truth, IndexRange mask) {
    if (pred.mean.rows() != truth.samples() || pred.mean.cols() != truth.channels()) {
        throw std::invalid_argument("evaluate: prediction and truth are not aligned");
    }
    check_mask(mask, truth.samples());
    Metrics m;
    m.sample_count = mask.size();
    double sq = 0.0;
    double var = 0.0;
    for (Index j = mask.begin; j < mask.end; ++j) {
        sq += (pred.mean.row(j) - truth.values.row(j)).squaredNorm() / static_cast<double>(truth.channels());
        var += pred.latent_variance(j);
    }
    m.rmse = std::sqrt(sq / static_cast<double>(m.sample_count));
    m.mean_latent_variance = var / static_cast<double>(m.sample_count);
    return m;
}

} // namespace bwl
