#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "bwl/types.hpp"

namespace bwl {

/// Observation noise std `sigma` and prior precision `alpha` of the output weights.
struct NoiseModel {
    double sigma = 1.0;
    double alpha = 1.0;

    void validate() const;
};

/// Raised when the normal equations cannot be solved reliably.
class IllConditionedError : public std::runtime_error {
public:
    IllConditionedError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}

    [[nodiscard]] double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// Condition estimates above this are reported through bwl::warn.
inline constexpr double kConditionWarning = 1e12;

/// Gaussian posterior over the K x n_out output weights: independent columns sharing the
/// covariance Sigma = (alpha I + Phi^T Phi / sigma^2)^{-1}, held in factored form.
class GaussianPosterior {
public:
    GaussianPosterior(Matrix mean, Eigen::LLT<Matrix> precision, NoiseModel noise);

    [[nodiscard]] const Matrix& mean() const noexcept { return mean_; }
    [[nodiscard]] const NoiseModel& noise() const noexcept { return noise_; }
    [[nodiscard]] Index feature_count() const noexcept { return mean_.rows(); }
    [[nodiscard]] Index output_count() const noexcept { return mean_.cols(); }
    /// Squared ratio of the extreme Cholesky diagonal entries of the precision.
    [[nodiscard]] double condition_estimate() const noexcept { return condition_estimate_; }

    /// Cholesky factor of the posterior precision alpha I + Phi^T Phi / sigma^2.
    [[nodiscard]] const Eigen::LLT<Matrix>& precision_factor() const noexcept { return precision_; }

    /// Dense Sigma, symmetrized. O(K^3); intended for inspection and tests.
    [[nodiscard]] Matrix covariance() const;

    /// Latent variance phi^T Sigma phi.
    [[nodiscard]] double latent_variance(const Vector& phi) const;
    /// Posterior mean phi^T m for one feature row, accumulated in a fixed order.
    void mean_row(const double* phi, double* out) const;

private:
    Matrix mean_;
    Eigen::LLT<Matrix> precision_;
    NoiseModel noise_;
    double condition_estimate_ = 1.0;
};

/// Latent predictive N(phi^T m, phi^T Sigma phi) at one query point.
struct PredictiveGaussian {
    Vector mean;
    double variance = 0.0;
};

struct BatchPrediction {
    Matrix mean;     // M* x n_out
    Vector variance; // M*, latent only
};

/// argmin_a sum_i |a^T phi_i - y_i|^2 + ridge |a|_F^2 through a Cholesky solve of
/// (Phi^T Phi + ridge I). Throws IllConditionedError when the system is numerically singular.
[[nodiscard]] Matrix fit_least_squares(const Matrix& phi, const Matrix& targets, double ridge);

/// Conjugate posterior of the output weights. Phi may have zero rows (prior recovery).
[[nodiscard]] GaussianPosterior fit_posterior(const Matrix& phi, const Matrix& targets, const NoiseModel& noise);

[[nodiscard]] PredictiveGaussian predict(const GaussianPosterior& posterior, const Vector& phi_star);

/// Row-wise predict without forming the M* x M* covariance.
[[nodiscard]] BatchPrediction predict_batch(const GaussianPosterior& posterior, const Matrix& phi_star);

} // namespace bwl
