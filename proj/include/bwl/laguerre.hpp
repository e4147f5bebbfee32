#pragma once

#include <span>
#include <vector>

#include "bwl/trajectory.hpp"
#include "bwl/types.hpp"

namespace bwl {

/// Number of Laguerre functions `order` and forgetting factor `lambda` (1/time) of one channel.
struct LaguerreConfig {
    int order = 1;
    double lambda = 1.0;

    void validate() const;
};

/// Continuous-time realization dy/dt = A y + B u whose impulse response is (l_0, ..., l_{p-1}).
///
/// State order is (l_0, ..., l_{p-1}); A is lower triangular with -lambda on the diagonal and
/// -2 lambda strictly below it, B = sqrt(2 lambda) * ones.
struct LaguerreStateMatrices {
    Matrix a;
    Vector b;
};

/// Exact zero-order-hold discretization of a Laguerre realization.
struct DiscreteFilter {
    Matrix phi;   // e^{A dt}
    Vector gamma; // A^{-1} (e^{A dt} - I) B
    double dt = 0.0;

    [[nodiscard]] Index order() const noexcept { return gamma.size(); }
};

/// Laguerre polynomial L_n(x) by the three-term recurrence.
[[nodiscard]] double laguerre_polynomial(int n, double x);

/// Generalized Laguerre polynomial L_n^{(alpha)}(x) by the three-term recurrence.
[[nodiscard]] double generalized_laguerre(int n, double alpha, double x);

/// l_n(t) = sqrt(2 lambda) e^{-lambda t} L_n(2 lambda t); orthonormal on [0, inf).
[[nodiscard]] double rescaled_laguerre(int n, double lambda, double t);

[[nodiscard]] LaguerreStateMatrices state_matrices(const LaguerreConfig& config);

/// Exact e^{A t} for the Laguerre state matrix of `config`, in closed form.
[[nodiscard]] Matrix laguerre_transition(const LaguerreConfig& config, double t);

/// Zero-order-hold discretization with sample period `dt`. The Laguerre structure of `mats`
/// (lower-triangular Toeplitz A) is required; lambda is read from its diagonal.
[[nodiscard]] DiscreteFilter discretize(const LaguerreStateMatrices& mats, double dt);

/// One Laguerre filter per input channel, all sharing one sample period.
class LaguerreBank {
public:
    LaguerreBank() = default;
    LaguerreBank(std::vector<LaguerreConfig> configs, double dt);

    [[nodiscard]] Index channel_count() const noexcept { return static_cast<Index>(configs_.size()); }
    [[nodiscard]] Index total_order() const noexcept { return total_order_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] const std::vector<LaguerreConfig>& configs() const noexcept { return configs_; }
    [[nodiscard]] const std::vector<DiscreteFilter>& filters() const noexcept { return filters_; }

    /// Advances the concatenated state by one zero-order-hold step with `input` held
    /// (one value per channel).
    void step(Vector& state, std::span<const double> input) const;

private:
    std::vector<LaguerreConfig> configs_;
    std::vector<DiscreteFilter> filters_;
    Index total_order_ = 0;
    double dt_ = 0.0;
};

/// Filters `u` (one column per bank channel) from the zero state. Row k of the result is the
/// concatenated state after k steps, so row 0 is zero and row k depends on u rows < k only.
[[nodiscard]] Matrix filter_signal(const LaguerreBank& bank, const TrajectoryData& u);

} // namespace bwl
