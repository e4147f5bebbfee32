#include "bwl/laguerre.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bwl {

void LaguerreConfig::validate() const {
    if (order < 1) throw std::invalid_argument("Laguerre order must be at least 1");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("Laguerre forgetting factor must be positive and finite");
    }
}

double laguerre_polynomial(int n, double x) { return generalized_laguerre(n, 0.0, x); }

double generalized_laguerre(int n, double alpha, double x) {
    if (n < 0) throw std::invalid_argument("Laguerre degree must be non-negative");
    double previous = 1.0;
    if (n == 0) return previous;
    double current = 1.0 + alpha - x;
    for (int k = 1; k < n; ++k) {
        const double next =
            ((2.0 * k + 1.0 + alpha - x) * current - (k + alpha) * previous) / (k + 1.0);
        previous = current;
        current = next;
    }
    return current;
}

double rescaled_laguerre(int n, double lambda, double t) {
    if (!(lambda > 0.0)) throw std::invalid_argument("rescaled_laguerre: lambda must be positive");
    if (t < 0.0) throw std::domain_error("rescaled_laguerre: t must be non-negative");
    return std::sqrt(2.0 * lambda) * std::exp(-lambda * t) * laguerre_polynomial(n, 2.0 * lambda * t);
}

LaguerreStateMatrices state_matrices(const LaguerreConfig& config) {
    config.validate();
    const Index p = config.order;
    LaguerreStateMatrices mats{Matrix::Zero(p, p), Vector::Constant(p, std::sqrt(2.0 * config.lambda))};
    for (Index i = 0; i < p; ++i) {
        mats.a(i, i) = -config.lambda;
        for (Index j = 0; j < i; ++j) mats.a(i, j) = -2.0 * config.lambda;
    }
    return mats;
}

namespace {

// First column of e^{A t}: e^{-lambda t} L^{(-1)}_n(2 lambda t), with
// L^{(-1)}_n(x) = -(x / n) L^{(1)}_{n-1}(x) for n >= 1. Entry 0 is returned as e^{-lambda t} - 1
// when `minus_identity` is set, computed with expm1.
Vector transition_column(Index p, double lambda, double t, bool minus_identity) {
    const double decay = std::exp(-lambda * t);
    const double x = 2.0 * lambda * t;
    Vector column(p);
    column(0) = minus_identity ? std::expm1(-lambda * t) : decay;
    for (Index n = 1; n < p; ++n) {
        const int deg = static_cast<int>(n);
        column(n) = -decay * (x / deg) * generalized_laguerre(deg - 1, 1.0, x);
    }
    return column;
}

Matrix lower_toeplitz(const Vector& column) {
    const Index p = column.size();
    Matrix out = Matrix::Zero(p, p);
    for (Index j = 0; j < p; ++j) out.col(j).tail(p - j) = column.head(p - j);
    return out;
}

} // namespace

Matrix laguerre_transition(const LaguerreConfig& config, double t) {
    config.validate();
    return lower_toeplitz(transition_column(config.order, config.lambda, t, false));
}

DiscreteFilter discretize(const LaguerreStateMatrices& mats, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("discretize: dt must be positive");
    const Index p = mats.a.rows();
    if (p < 1 || mats.a.cols() != p || mats.b.size() != p) {
        throw std::invalid_argument("discretize: inconsistent state matrix dimensions");
    }
    const double lambda = -mats.a(0, 0);
    if (!(lambda > 0.0)) throw std::invalid_argument("discretize: A must have a negative diagonal");

    DiscreteFilter filter;
    filter.dt = dt;
    filter.phi = lower_toeplitz(transition_column(p, lambda, dt, false));
    const Matrix phi_minus_identity = lower_toeplitz(transition_column(p, lambda, dt, true));
    filter.gamma = mats.a.triangularView<Eigen::Lower>().solve(phi_minus_identity * mats.b);
    return filter;
}

LaguerreBank::LaguerreBank(std::vector<LaguerreConfig> configs, double dt)
    : configs_(std::move(configs)), dt_(dt) {
    if (configs_.empty()) throw std::invalid_argument("Laguerre bank needs at least one channel");
    filters_.reserve(configs_.size());
    for (const auto& config : configs_) {
        filters_.push_back(discretize(state_matrices(config), dt));
        total_order_ += config.order;
    }
}

void LaguerreBank::step(Vector& state, std::span<const double> input) const {
    if (static_cast<Index>(input.size()) != channel_count()) {
        throw std::invalid_argument("Laguerre bank step: expected " + std::to_string(channel_count()) +
                                    " input channels");
    }
    Index offset = 0;
    for (std::size_t c = 0; c < filters_.size(); ++c) {
        const auto& f = filters_[c];
        const Index p = f.order();
        auto block = state.segment(offset, p);
        // phi is lower triangular, so updating from the last row up keeps the inputs intact.
        for (Index i = p - 1; i >= 0; --i) {
            double acc = f.gamma(i) * input[c];
            for (Index j = 0; j <= i; ++j) acc += f.phi(i, j) * block(j);
            block(i) = acc;
        }
        offset += p;
    }
}

Matrix filter_signal(const LaguerreBank& bank, const TrajectoryData& u) {
    if (u.channels() != bank.channel_count()) {
        throw std::invalid_argument("filter_signal: input has " + std::to_string(u.channels()) +
                                    " channels, bank has " + std::to_string(bank.channel_count()));
    }
    if (std::abs(u.dt - bank.dt()) > 1e-12 * bank.dt()) {
        throw std::invalid_argument("filter_signal: input sample period does not match the filter");
    }
    const Index m = u.samples();
    Matrix latents(m, bank.total_order());
    Vector state = Vector::Zero(bank.total_order());
    std::vector<double> input(static_cast<std::size_t>(bank.channel_count()));
    for (Index k = 0; k < m; ++k) {
        latents.row(k) = state.transpose();
        for (Index c = 0; c < u.channels(); ++c) input[static_cast<std::size_t>(c)] = u.values(k, c);
        bank.step(state, input);
    }
    return latents;
}

} // namespace bwl
