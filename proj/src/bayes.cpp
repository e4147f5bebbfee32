#include "bwl/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bwl/log.hpp"

namespace bwl {

void NoiseModel::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("noise sigma must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("prior precision alpha must be positive");
}

namespace {

double diagonal_condition(const Eigen::LLT<Matrix>& llt) {
    const auto diag = llt.matrixLLT().diagonal();
    if (diag.size() == 0) return 1.0;
    const double hi = diag.cwiseAbs().maxCoeff();
    const double lo = diag.cwiseAbs().minCoeff();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    const double ratio = hi / lo;
    return ratio * ratio;
}

// Lower triangle of Phi^T Phi * scale + shift * I.
Matrix regularized_gram(const Matrix& phi, double scale, double shift) {
    const Index k = phi.cols();
    Matrix gram = Matrix::Zero(k, k);
    if (phi.rows() > 0) gram.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose(), scale);
    gram.diagonal().array() += shift;
    return gram;
}

constexpr Index kSolveBlock = 256;

} // namespace

GaussianPosterior::GaussianPosterior(Matrix mean, Eigen::LLT<Matrix> precision, NoiseModel noise)
    : mean_(std::move(mean)), precision_(std::move(precision)), noise_(noise),
      condition_estimate_(diagonal_condition(precision_)) {}

Matrix GaussianPosterior::covariance() const {
    Matrix sigma = precision_.solve(Matrix::Identity(feature_count(), feature_count()));
    return 0.5 * (sigma + sigma.transpose());
}

double GaussianPosterior::latent_variance(const Vector& phi) const {
    const Vector half = precision_.matrixL().solve(phi);
    return half.squaredNorm();
}

void GaussianPosterior::mean_row(const double* phi, double* out) const {
    for (Index o = 0; o < output_count(); ++o) {
        double acc = 0.0;
        for (Index i = 0; i < feature_count(); ++i) acc += phi[i] * mean_(i, o);
        out[o] = acc;
    }
}

Matrix fit_least_squares(const Matrix& phi, const Matrix& targets, double ridge) {
    if (phi.rows() < 1) throw std::invalid_argument("fit_least_squares: need at least one sample");
    if (targets.rows() != phi.rows()) throw std::invalid_argument("fit_least_squares: row count mismatch");
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw std::invalid_argument("fit_least_squares: ridge must be >= 0");

    const Matrix gram = regularized_gram(phi, 1.0, ridge);
    Eigen::LLT<Matrix> llt(gram);
    const double estimate = diagonal_condition(llt);
    const double limit = 1.0 / std::numeric_limits<double>::epsilon();
    if (llt.info() != Eigen::Success || (ridge == 0.0 && !(estimate < limit))) {
        throw IllConditionedError("fit_least_squares: normal equations are singular (condition estimate " +
                                      std::to_string(estimate) + ")",
                                  estimate);
    }
    if (estimate > kConditionWarning) {
        warn("fit_least_squares: condition estimate " + std::to_string(estimate));
    }
    return llt.solve(phi.transpose() * targets);
}

GaussianPosterior fit_posterior(const Matrix& phi, const Matrix& targets, const NoiseModel& noise) {
    noise.validate();
    if (targets.rows() != phi.rows()) throw std::invalid_argument("fit_posterior: row count mismatch");
    if (!phi.allFinite() || !targets.allFinite()) throw std::invalid_argument("fit_posterior: non-finite data");

    const double inv_var = 1.0 / (noise.sigma * noise.sigma);
    Eigen::LLT<Matrix> llt(regularized_gram(phi, inv_var, noise.alpha));
    if (llt.info() != Eigen::Success) {
        throw IllConditionedError("fit_posterior: Cholesky factorization of the precision failed",
                                  std::numeric_limits<double>::infinity());
    }
    Matrix mean = Matrix::Zero(phi.cols(), targets.cols());
    if (phi.rows() > 0) mean = llt.solve(phi.transpose() * targets) * inv_var;
    GaussianPosterior posterior(std::move(mean), std::move(llt), noise);
    if (posterior.condition_estimate() > kConditionWarning) {
        warn("fit_posterior: condition estimate " + std::to_string(posterior.condition_estimate()));
    }
    return posterior;
}

PredictiveGaussian predict(const GaussianPosterior& posterior, const Vector& phi_star) {
    if (phi_star.size() != posterior.feature_count()) {
        throw std::invalid_argument("predict: feature vector length does not match the posterior");
    }
    PredictiveGaussian out;
    out.mean.resize(posterior.output_count());
    posterior.mean_row(phi_star.data(), out.mean.data());
    out.variance = posterior.latent_variance(phi_star);
    return out;
}

BatchPrediction predict_batch(const GaussianPosterior& posterior, const Matrix& phi_star) {
    if (phi_star.cols() != posterior.feature_count()) {
        throw std::invalid_argument("predict_batch: feature matrix has the wrong column count");
    }
    const Index m = phi_star.rows();
    const Index k = phi_star.cols();
    BatchPrediction out{Matrix(m, posterior.output_count()), Vector(m)};

    std::vector<double> row(static_cast<std::size_t>(k));
    std::vector<double> mean(static_cast<std::size_t>(posterior.output_count()));
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < k; ++i) row[static_cast<std::size_t>(i)] = phi_star(j, i);
        posterior.mean_row(row.data(), mean.data());
        for (Index o = 0; o < posterior.output_count(); ++o) out.mean(j, o) = mean[static_cast<std::size_t>(o)];
    }

    // Variances in column blocks of L^{-1} Phi*^T.
    for (Index start = 0; start < m; start += kSolveBlock) {
        const Index count = std::min(kSolveBlock, m - start);
        Matrix half = phi_star.middleRows(start, count).transpose();
        posterior.precision_factor().matrixL().solveInPlace(half);
        out.variance.segment(start, count) = half.colwise().squaredNorm().transpose();
    }
    return out;
}

} // namespace bwl
