#include <doctest.h>

#include <Eigen/LU>
#include <cmath>
#include <string>
#include <vector>

#include "bwl/bayes.hpp"
#include "bwl/log.hpp"
#include "bwl/rng.hpp"

using namespace bwl;

namespace {

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

// Textbook conjugate update with explicit inverses.
struct ExplicitPosterior {
    Matrix sigma;
    Matrix mean;
};

ExplicitPosterior explicit_posterior(const Matrix& phi, const Matrix& y, double sigma, double alpha) {
    const Index k = phi.cols();
    const Matrix precision = alpha * Matrix::Identity(k, k) + phi.transpose() * phi / (sigma * sigma);
    const Matrix cov = precision.inverse();
    return {cov, cov * phi.transpose() * y / (sigma * sigma)};
}

} // namespace

TEST_CASE("least squares small cases") {
    const Matrix eye = Matrix::Identity(4, 4);
    Matrix y(4, 2);
    y << 1, 2, 3, 4, 5, 6, 7, 8;
    CHECK((fit_least_squares(eye, y, 0.0) - y).cwiseAbs().maxCoeff() <= 1e-14);

    Matrix phi(2, 1), t(2, 1);
    phi << 1, 1;
    t << 1, 3;
    CHECK(fit_least_squares(phi, t, 0.0)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("least squares satisfies the normal equations") {
    Rng rng(RngSeed{3});
    for (double ridge : {0.0, 0.1, 5.0}) {
        const Matrix phi = gaussian_matrix(50, 10, rng);
        const Matrix y = gaussian_matrix(50, 2, rng);
        const Matrix a = fit_least_squares(phi, y, ridge);
        const Matrix grad = 2.0 * phi.transpose() * (phi * a - y) + 2.0 * ridge * a;
        CHECK(grad.cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("least squares rejects singular systems without ridge") {
    Matrix phi(3, 2);
    phi << 1, 1, 2, 2, 3, 3;
    CHECK_THROWS_AS((void)fit_least_squares(phi, Matrix::Ones(3, 1), 0.0), IllConditionedError);
    CHECK_THROWS_AS((void)fit_least_squares(phi, Matrix::Ones(2, 1), 0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)fit_least_squares(phi, Matrix::Ones(3, 1), -1.0), std::invalid_argument);
}

TEST_CASE("scalar posterior") {
    const auto post = fit_posterior(Matrix::Ones(1, 1), Matrix::Constant(1, 1, 2.0), NoiseModel{1.0, 1.0});
    CHECK(post.covariance()(0, 0) == doctest::Approx(0.5));
    CHECK(post.mean()(0, 0) == doctest::Approx(1.0));
    const auto pred = predict(post, Vector::Ones(1));
    CHECK(pred.mean(0) == doctest::Approx(1.0));
    CHECK(pred.variance == doctest::Approx(0.5));
    const auto zero = predict(post, Vector::Zero(1));
    CHECK(zero.mean(0) == 0.0);
    CHECK(zero.variance == 0.0);
}

TEST_CASE("empty data recovers the prior") {
    const auto post = fit_posterior(Matrix(0, 3), Matrix(0, 2), NoiseModel{0.5, 4.0});
    CHECK(post.mean().isZero(0.0));
    CHECK(post.mean().rows() == 3);
    CHECK(post.mean().cols() == 2);
    CHECK((post.covariance() - 0.25 * Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("posterior mean equals ridge with ridge = alpha sigma^2") {
    Rng rng(RngSeed{17});
    const NoiseModel noise{0.3, 2.0};
    const Matrix phi = gaussian_matrix(200, 20, rng);
    const Matrix y = gaussian_matrix(200, 1, rng);
    const auto post = fit_posterior(phi, y, noise);
    const Matrix ridge = fit_least_squares(phi, y, noise.alpha * noise.sigma * noise.sigma);
    CHECK((post.mean() - ridge).norm() <= 1e-8 * post.mean().norm());
}

TEST_CASE("brute-force conjugacy on small instances") {
    Rng rng(RngSeed{23});
    for (int trial = 0; trial < 40; ++trial) {
        const Index k = 1 + trial % 5;
        const Index m = 1 + trial % 8;
        const double sigma = 0.2 + 0.1 * (trial % 7);
        const double alpha = 0.5 + 0.3 * (trial % 4);
        const Matrix phi = gaussian_matrix(m, k, rng);
        const Matrix y = gaussian_matrix(m, 2, rng);
        const auto post = fit_posterior(phi, y, NoiseModel{sigma, alpha});
        const auto ref = explicit_posterior(phi, y, sigma, alpha);
        CHECK((post.covariance() - ref.sigma).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((post.mean() - ref.mean).cwiseAbs().maxCoeff() <= 1e-10);
        const Vector probe = gaussian_matrix(k, 1, rng);
        const auto pred = predict(post, probe);
        CHECK(std::abs(pred.variance - probe.dot(ref.sigma * probe)) <= 1e-10);
        CHECK((pred.mean - ref.mean.transpose() * probe).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("covariance is symmetric positive definite") {
    Rng rng(RngSeed{4});
    const Matrix phi = gaussian_matrix(60, 15, rng);
    const auto post = fit_posterior(phi, gaussian_matrix(60, 1, rng), NoiseModel{0.1, 1.0});
    const Matrix cov = post.covariance();
    CHECK((cov - cov.transpose()).norm() <= 1e-10 * cov.norm());
    CHECK(Eigen::LLT<Matrix>(cov).info() == Eigen::Success);
}

TEST_CASE("posterior contraction as rows are appended") {
    Rng rng(RngSeed{8});
    const Matrix phi = gaussian_matrix(30, 6, rng);
    const Matrix y = gaussian_matrix(30, 1, rng);
    const Matrix probes = gaussian_matrix(20, 6, rng);
    std::vector<double> previous(20, 1e300);
    for (Index m = 0; m <= 30; ++m) {
        const auto post = fit_posterior(phi.topRows(m), y.topRows(m), NoiseModel{0.5, 1.0});
        for (Index j = 0; j < 20; ++j) {
            const double v = post.latent_variance(probes.row(j).transpose());
            CHECK(v <= previous[j] * (1.0 + 1e-12));
            previous[j] = v;
        }
    }
}

TEST_CASE("growing alpha shrinks the mean") {
    Rng rng(RngSeed{10});
    const Matrix phi = gaussian_matrix(40, 8, rng);
    const Matrix y = gaussian_matrix(40, 1, rng);
    double previous = 1e300;
    for (double alpha : {1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6}) {
        const double norm = fit_posterior(phi, y, NoiseModel{1.0, alpha}).mean().norm();
        CHECK(norm < previous);
        previous = norm;
    }
    CHECK(previous < 1e-3);
}

TEST_CASE("batch prediction") {
    Rng rng(RngSeed{12});
    const Index k = 12;
    const NoiseModel noise{0.4, 0.7};
    const Matrix phi = gaussian_matrix(25, k, rng);
    const auto post = fit_posterior(phi, gaussian_matrix(25, 3, rng), noise);
    const Matrix probes = gaussian_matrix(300, k, rng);
    const auto batch = predict_batch(post, probes);
    for (Index j = 0; j < 300; ++j) {
        const auto single = predict(post, probes.row(j).transpose());
        CHECK(batch.mean.row(j) == single.mean.transpose());
        CHECK(batch.variance(j) == doctest::Approx(single.variance).epsilon(1e-12));
        CHECK(batch.variance(j) >= 0.0);
        CHECK(batch.variance(j) <= probes.row(j).squaredNorm() / noise.alpha * (1.0 + 1e-12));
    }
    const auto shrunk = predict_batch(fit_posterior(phi, gaussian_matrix(25, 3, rng), NoiseModel{0.4, 1e8}), phi);
    CHECK(shrunk.mean.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("noise model validation") {
    CHECK_THROWS_AS(NoiseModel({0.0, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(NoiseModel({1.0, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((void)fit_posterior(Matrix::Ones(3, 2), Matrix::Ones(2, 1), NoiseModel{}), std::invalid_argument);
}

TEST_CASE("poor conditioning is reported as a warning") {
    std::vector<std::string> messages;
    auto previous = set_warning_sink([&](std::string_view m) { messages.emplace_back(m); });
    Matrix phi(4, 2);
    phi << 1e7, 0, 0, 1e-7, 1e7, 0, 0, 1e-7;
    const auto post = fit_posterior(phi, Matrix::Ones(4, 1), NoiseModel{1.0, 1e-9});
    set_warning_sink(previous);
    CHECK(post.condition_estimate() > kConditionWarning);
    CHECK(messages.size() == 1);
}
