#pragma once

#include <array>
#include <vector>

#include "bwl/rng.hpp"
#include "bwl/trajectory.hpp"
#include "bwl/types.hpp"

namespace bwl {

/// u(t) = amplitude_scale * sum_{k=1}^{harmonics} sin(k omega0 t + phase_k).
struct FourierInputSpec {
    int harmonics = 5;
    double omega0 = 1.0;
    std::vector<double> phases;
    double amplitude_scale = 0.0; // 0 selects 1/sqrt(harmonics)

    /// Phases drawn uniformly on [0, 2 pi) from `seed`.
    [[nodiscard]] static FourierInputSpec with_random_phases(int harmonics, double omega0, RngSeed seed);
    [[nodiscard]] double amplitude() const;
    void validate() const;
};

[[nodiscard]] TrajectoryData fourier_input(const FourierInputSpec& spec, Index samples, double dt, double t0 = 0.0);

/// y'' + damping y' + stiffness y = gain u from rest, RK4 with u held over each step.
[[nodiscard]] TrajectoryData simulate_forced_second_order(const TrajectoryData& u, double damping,
                                                          double stiffness, double gain);

/// x' = v, v' = mu (1 - x^2) v - x by RK4; `samples` rows (x, v) starting at `x0`.
[[nodiscard]] TrajectoryData simulate_van_der_pol(double mu, std::array<double, 2> x0, Index samples,
                                                  double dt, double t0 = 0.0);

/// Adds i.i.d. N(0, std^2) to every entry.
[[nodiscard]] TrajectoryData add_noise(const TrajectoryData& traj, double std_dev, RngSeed seed);

/// Sum of three isotropic Gaussian densities on [-half_width, half_width]^dim.
struct TrimodalSpec {
    int dim = 1;
    double covariance_scale = 20.0;
    double center_offset = 15.0;
    double half_width = 30.0;

    void validate() const;
    /// Centers -offset*1, +offset*1 and 0.
    [[nodiscard]] std::array<Vector, 3> centers() const;
};

[[nodiscard]] double trimodal_gaussian(const TrimodalSpec& spec, const Vector& x);

/// Uniform sample of the domain box, one point per row.
[[nodiscard]] Matrix sample_domain(const TrimodalSpec& spec, Index count, RngSeed seed);

} // namespace bwl
