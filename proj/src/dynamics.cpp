#include "bwl/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bwl {

FourierInputSpec FourierInputSpec::with_random_phases(int harmonics, double omega0, RngSeed seed) {
    FourierInputSpec spec;
    spec.harmonics = harmonics;
    spec.omega0 = omega0;
    Rng rng(seed);
    for (int k = 0; k < harmonics; ++k) {
        double phase = 0.0;
        do {
            phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        } while (phase >= 2.0 * std::numbers::pi);
        spec.phases.push_back(phase);
    }
    spec.validate();
    return spec;
}

double FourierInputSpec::amplitude() const {
    return amplitude_scale != 0.0 ? amplitude_scale : 1.0 / std::sqrt(static_cast<double>(harmonics));
}

void FourierInputSpec::validate() const {
    if (harmonics < 1) throw std::invalid_argument("Fourier input needs at least one harmonic");
    if (!(omega0 > 0.0)) throw std::invalid_argument("Fourier fundamental frequency must be positive");
    if (static_cast<int>(phases.size()) != harmonics) {
        throw std::invalid_argument("Fourier input needs one phase per harmonic");
    }
}

TrajectoryData fourier_input(const FourierInputSpec& spec, Index samples, double dt, double t0) {
    spec.validate();
    if (samples < 0) throw std::invalid_argument("sample count must be non-negative");
    const double amp = spec.amplitude();
    Matrix values(samples, 1);
    for (Index j = 0; j < samples; ++j) {
        const double t = t0 + static_cast<double>(j) * dt;
        double sum = 0.0;
        for (int k = 1; k <= spec.harmonics; ++k) {
            sum += std::sin(k * spec.omega0 * t + spec.phases[static_cast<std::size_t>(k - 1)]);
        }
        values(j, 0) = amp * sum;
    }
    return TrajectoryData(t0, dt, std::move(values));
}

namespace {

using State = std::array<double, 2>;

template <typename Rhs>
State rk4_step(const State& s, double h, Rhs&& rhs) {
    auto axpy = [](const State& a, double c, const State& b) { return State{a[0] + c * b[0], a[1] + c * b[1]}; };
    const State k1 = rhs(s);
    const State k2 = rhs(axpy(s, 0.5 * h, k1));
    const State k3 = rhs(axpy(s, 0.5 * h, k2));
    const State k4 = rhs(axpy(s, h, k3));
    return State{s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                 s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

} // namespace

TrajectoryData simulate_forced_second_order(const TrajectoryData& u, double damping, double stiffness,
                                            double gain) {
    if (u.channels() != 1) throw std::invalid_argument("forced second-order system takes a single input channel");
    Matrix y(u.samples(), 1);
    State s{0.0, 0.0};
    for (Index k = 0; k < u.samples(); ++k) {
        y(k, 0) = s[0];
        const double force = gain * u.values(k, 0);
        s = rk4_step(s, u.dt, [&](const State& q) {
            return State{q[1], force - damping * q[1] - stiffness * q[0]};
        });
    }
    return TrajectoryData(u.t0, u.dt, std::move(y));
}

TrajectoryData simulate_van_der_pol(double mu, std::array<double, 2> x0, Index samples, double dt, double t0) {
    if (!(dt > 0.0)) throw std::invalid_argument("Van der Pol step must be positive");
    if (samples < 0) throw std::invalid_argument("sample count must be non-negative");
    Matrix out(samples, 2);
    State s{x0[0], x0[1]};
    for (Index k = 0; k < samples; ++k) {
        out(k, 0) = s[0];
        out(k, 1) = s[1];
        s = rk4_step(s, dt, [mu](const State& q) {
            return State{q[1], mu * (1.0 - q[0] * q[0]) * q[1] - q[0]};
        });
    }
    return TrajectoryData(t0, dt, std::move(out));
}

TrajectoryData add_noise(const TrajectoryData& traj, double std_dev, RngSeed seed) {
    if (!(std_dev >= 0.0) || !std::isfinite(std_dev)) throw std::invalid_argument("noise std must be >= 0");
    TrajectoryData noisy = traj;
    if (std_dev == 0.0) return noisy;
    Rng rng(seed);
    // Row-major draw order: sample k, channel c.
    for (Index k = 0; k < noisy.samples(); ++k) {
        for (Index c = 0; c < noisy.channels(); ++c) noisy.values(k, c) += std_dev * rng.normal();
    }
    return noisy;
}

void TrimodalSpec::validate() const {
    if (dim < 1) throw std::invalid_argument("trimodal dimension must be at least 1");
    if (!(covariance_scale > 0.0)) throw std::invalid_argument("trimodal covariance scale must be positive");
    if (!(half_width > 0.0)) throw std::invalid_argument("trimodal domain half-width must be positive");
}

std::array<Vector, 3> TrimodalSpec::centers() const {
    return {Vector::Constant(dim, -center_offset), Vector::Constant(dim, center_offset), Vector::Zero(dim)};
}

double trimodal_gaussian(const TrimodalSpec& spec, const Vector& x) {
    spec.validate();
    if (x.size() != spec.dim) {
        throw std::invalid_argument("trimodal_gaussian: expected a point of dimension " + std::to_string(spec.dim));
    }
    const double norm = std::pow(2.0 * std::numbers::pi * spec.covariance_scale, -0.5 * spec.dim);
    double sum = 0.0;
    for (const Vector& c : spec.centers()) {
        sum += std::exp(-(x - c).squaredNorm() / (2.0 * spec.covariance_scale));
    }
    return norm * sum;
}

Matrix sample_domain(const TrimodalSpec& spec, Index count, RngSeed seed) {
    spec.validate();
    if (count < 1) throw std::invalid_argument("sample_domain: count must be at least 1");
    Rng rng(seed);
    Matrix points(count, spec.dim);
    for (Index j = 0; j < count; ++j) {
        for (Index k = 0; k < spec.dim; ++k) points(j, k) = rng.uniform(-spec.half_width, spec.half_width);
    }
    return points;
}

} // namespace bwl
