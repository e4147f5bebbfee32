#pragma once

#include <string>
#include <string_view>

#include "bwl/rng.hpp"
#include "bwl/types.hpp"

namespace bwl {

enum class Activation { Cosine, Tanh, ReLU, Sigmoid };

/// Discretization of the Barron parameter measure. PassThrough returns its input unchanged
/// and exists for composition tests only.
enum class FeatureKind { Atomic, RFF, ELM, PassThrough };

[[nodiscard]] double activate(Activation activation, double x) noexcept;

[[nodiscard]] std::string_view to_string(Activation activation) noexcept;
[[nodiscard]] std::string_view to_string(FeatureKind kind) noexcept;
/// Accepts the lower-case names printed by to_string; throws std::invalid_argument otherwise.
[[nodiscard]] Activation parse_activation(std::string_view name);

/// Hidden layer x -> sigma(W x + b) with K rows of W. Immutable once built.
class FeatureMap {
public:
    [[nodiscard]] FeatureKind kind() const noexcept { return kind_; }
    [[nodiscard]] Activation activation() const noexcept { return activation_; }
    [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }
    [[nodiscard]] const Vector& biases() const noexcept { return biases_; }
    [[nodiscard]] Index input_dim() const noexcept { return input_dim_; }
    [[nodiscard]] Index feature_count() const noexcept { return feature_count_; }
    /// Seed the parameters were drawn from (RFF, ELM).
    [[nodiscard]] RngSeed seed() const noexcept { return seed_; }
    /// RFF lengthscale l; zero for other kinds.
    [[nodiscard]] double lengthscale() const noexcept { return lengthscale_; }

    /// Features of a single input, written to `out` (length K). Same arithmetic as
    /// evaluate_features, so rows agree bit for bit.
    void evaluate_row(const double* x, double* out) const;

    friend FeatureMap sample_rff(Index, Index, double, RngSeed);
    friend FeatureMap sample_elm(Index, Index, Activation, RngSeed);
    friend FeatureMap atomic_map(Matrix, Vector, Activation);
    friend FeatureMap pass_through_map(Index);

private:
    FeatureMap() = default;

    FeatureKind kind_ = FeatureKind::Atomic;
    Activation activation_ = Activation::Tanh;
    Matrix weights_;
    Vector biases_;
    Index input_dim_ = 0;
    Index feature_count_ = 0;
    RngSeed seed_{};
    double lengthscale_ = 0.0;
};

/// Random Fourier features: W_i ~ N(0, l^{-2} I), b_i ~ U[0, 2 pi], cosine activation.
/// No sqrt(2/K) factor is applied.
[[nodiscard]] FeatureMap sample_rff(Index feature_count, Index input_dim, double lengthscale, RngSeed seed);

/// Extreme-learning-machine features: W_i ~ N(0, d^{-1} I), b_i ~ N(0, 1).
[[nodiscard]] FeatureMap sample_elm(Index feature_count, Index input_dim, Activation activation, RngSeed seed);

/// Wraps user-supplied hidden weights (K x d) and biases (K).
[[nodiscard]] FeatureMap atomic_map(Matrix weights, Vector biases, Activation activation);

/// Identity features on `input_dim` inputs.
[[nodiscard]] FeatureMap pass_through_map(Index input_dim);

/// Phi(j, i) = sigma(W_i . x_j + b_i) for the M x d inputs X; Phi is M x K.
[[nodiscard]] Matrix evaluate_features(const FeatureMap& map, const Matrix& inputs);

} // namespace bwl
