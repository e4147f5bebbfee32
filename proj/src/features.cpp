#include "bwl/features.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bwl {

double activate(Activation activation, double x) noexcept {
    switch (activation) {
    case Activation::Cosine: return std::cos(x);
    case Activation::Tanh: return std::tanh(x);
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

std::string_view to_string(Activation activation) noexcept {
    switch (activation) {
    case Activation::Cosine: return "cosine";
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    }
    return "unknown";
}

std::string_view to_string(FeatureKind kind) noexcept {
    switch (kind) {
    case FeatureKind::Atomic: return "atomic";
    case FeatureKind::RFF: return "rff";
    case FeatureKind::ELM: return "elm";
    case FeatureKind::PassThrough: return "pass-through";
    }
    return "unknown";
}

Activation parse_activation(std::string_view name) {
    for (auto a : {Activation::Cosine, Activation::Tanh, Activation::ReLU, Activation::Sigmoid}) {
        if (to_string(a) == name) return a;
    }
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

namespace {

void check_counts(Index feature_count, Index input_dim) {
    if (feature_count < 1) throw std::invalid_argument("feature count must be at least 1");
    if (input_dim < 1) throw std::invalid_argument("feature input dimension must be at least 1");
}

} // namespace

void FeatureMap::evaluate_row(const double* x, double* out) const {
    if (kind_ == FeatureKind::PassThrough) {
        for (Index i = 0; i < feature_count_; ++i) out[i] = x[i];
        return;
    }
    for (Index i = 0; i < feature_count_; ++i) {
        double pre = biases_(i);
        for (Index k = 0; k < input_dim_; ++k) pre += weights_(i, k) * x[k];
        out[i] = activate(activation_, pre);
    }
}

FeatureMap sample_rff(Index feature_count, Index input_dim, double lengthscale, RngSeed seed) {
    check_counts(feature_count, input_dim);
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
        throw std::invalid_argument("RFF lengthscale must be positive and finite");
    }
    FeatureMap map;
    map.kind_ = FeatureKind::RFF;
    map.activation_ = Activation::Cosine;
    map.input_dim_ = input_dim;
    map.feature_count_ = feature_count;
    map.seed_ = seed;
    map.lengthscale_ = lengthscale;
    map.weights_.resize(feature_count, input_dim);
    map.biases_.resize(feature_count);
    Rng rng(seed);
    const double scale = 1.0 / lengthscale;
    for (Index i = 0; i < feature_count; ++i) {
        for (Index k = 0; k < input_dim; ++k) map.weights_(i, k) = scale * rng.normal();
        map.biases_(i) = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return map;
}

FeatureMap sample_elm(Index feature_count, Index input_dim, Activation activation, RngSeed seed) {
    check_counts(feature_count, input_dim);
    FeatureMap map;
    map.kind_ = FeatureKind::ELM;
    map.activation_ = activation;
    map.input_dim_ = input_dim;
    map.feature_count_ = feature_count;
    map.seed_ = seed;
    map.weights_.resize(feature_count, input_dim);
    map.biases_.resize(feature_count);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (Index i = 0; i < feature_count; ++i) {
        for (Index k = 0; k < input_dim; ++k) map.weights_(i, k) = scale * rng.normal();
        map.biases_(i) = rng.normal();
    }
    return map;
}

FeatureMap atomic_map(Matrix weights, Vector biases, Activation activation) {
    if (weights.rows() != biases.size()) {
        throw std::invalid_argument("atomic_map: weights have " + std::to_string(weights.rows()) +
                                    " rows but there are " + std::to_string(biases.size()) + " biases");
    }
    check_counts(weights.rows(), weights.cols());
    if (!weights.allFinite() || !biases.allFinite()) {
        throw std::invalid_argument("atomic_map: parameters must be finite");
    }
    FeatureMap map;
    map.kind_ = FeatureKind::Atomic;
    map.activation_ = activation;
    map.input_dim_ = weights.cols();
    map.feature_count_ = weights.rows();
    map.weights_ = std::move(weights);
    map.biases_ = std::move(biases);
    return map;
}

FeatureMap pass_through_map(Index input_dim) {
    check_counts(input_dim, input_dim);
    FeatureMap map;
    map.kind_ = FeatureKind::PassThrough;
    map.input_dim_ = input_dim;
    map.feature_count_ = input_dim;
    return map;
}

Matrix evaluate_features(const FeatureMap& map, const Matrix& inputs) {
    if (inputs.cols() != map.input_dim()) {
        throw std::invalid_argument("evaluate_features: inputs have " + std::to_string(inputs.cols()) +
                                    " columns, map expects " + std::to_string(map.input_dim()));
    }
    // Row-major scratch keeps each sample contiguous for evaluate_row.
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMatrix x = inputs;
    RowMatrix phi(inputs.rows(), map.feature_count());
    for (Index j = 0; j < x.rows(); ++j) map.evaluate_row(x.row(j).data(), phi.row(j).data());
    return phi;
}

} // namespace bwl
