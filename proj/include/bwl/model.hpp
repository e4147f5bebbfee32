#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "bwl/bayes.hpp"
#include "bwl/features.hpp"
#include "bwl/laguerre.hpp"
#include "bwl/trajectory.hpp"

namespace bwl {

/// How the hidden layer is drawn when a model is fitted.
struct FeatureSpec {
    FeatureKind kind = FeatureKind::RFF;
    Index count = 1000;
    /// RFF only. Empty selects the median pairwise distance of the training latents.
    std::optional<double> lengthscale;
    Activation activation = Activation::Tanh; // ELM only
    RngSeed seed{};
};

struct BWLConfig {
    std::vector<LaguerreConfig> bank;
    FeatureSpec feature;
    NoiseModel noise;
    double sample_dt = 0.01;

    void validate() const;
};

struct FittedBWL {
    BWLConfig config; // lengthscale resolved
    LaguerreBank bank;
    FeatureMap feature_map;
    GaussianPosterior posterior;
    IndexRange training_span;
};

struct PredictionResult {
    Matrix mean;                       // M x n_out
    Vector latent_variance;            // M
    Vector latent_plus_noise_variance; // latent + sigma^2
};

struct Metrics {
    double rmse = 0.0;
    double mean_latent_variance = 0.0;
    Index sample_count = 0;
};

struct RolloutResult {
    TrajectoryData mean;    // steps x channels, starting one sample after the prefix
    Vector latent_variance; // one-step latent variance along the realized path
};

/// Laguerre states of `u`, channel blocks concatenated in bank order.
[[nodiscard]] Matrix build_latents(const BWLConfig& config, const TrajectoryData& u);

/// Median Euclidean distance over distinct row pairs (rows strided down to at most
/// `max_rows` first).
[[nodiscard]] double median_pairwise_distance(const Matrix& rows, Index max_rows = 3000);

/// Filters the whole input causally, then regresses the rows of `train_mask` on `z`.
[[nodiscard]] FittedBWL fit(const BWLConfig& config, const TrajectoryData& u, const TrajectoryData& z,
                            IndexRange train_mask);

/// As fit, with a caller-supplied hidden layer (for example an atomic map).
[[nodiscard]] FittedBWL fit_with_map(const BWLConfig& config, FeatureMap map, const TrajectoryData& u,
                                     const TrajectoryData& z, IndexRange train_mask);

[[nodiscard]] PredictionResult predict(const FittedBWL& model, const TrajectoryData& u);

/// input = rows [0, M-k), target = rows [k, M): target row j is k samples ahead of input row j.
[[nodiscard]] std::pair<TrajectoryData, TrajectoryData> make_shifted_target(const TrajectoryData& series, Index k);

/// Closed-loop generation for a one-step-shift model. The prefix drives the filter; each
/// further sample is the model's mean prediction fed back as the next input. When
/// `feedback` is given, its rows (indexed on the prefix grid) are fed back instead, which
/// reproduces open-loop prediction.
[[nodiscard]] RolloutResult rollout(const FittedBWL& model, const TrajectoryData& series_prefix, Index steps,
                                    const TrajectoryData* feedback = nullptr);

/// RMSE over the rows of `mask` (squared error averaged over outputs, then samples) and
/// the mean latent variance over the same rows.
[[nodiscard]] Metrics evaluate(const PredictionResult& pred, const TrajectoryData& truth, IndexRange mask);

} // namespace bwl
