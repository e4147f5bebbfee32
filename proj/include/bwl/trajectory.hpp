#pragma once

#include <filesystem>
#include <string>

#include "bwl/types.hpp"

namespace bwl {

/// Uniformly sampled multichannel signal. Row k is the sample at time t0 + k*dt.
struct TrajectoryData {
    double t0 = 0.0;
    double dt = 1.0;
    Matrix values; // samples x channels

    TrajectoryData() = default;
    TrajectoryData(double start, double step, Matrix samples);

    [[nodiscard]] Index samples() const noexcept { return values.rows(); }
    [[nodiscard]] Index channels() const noexcept { return values.cols(); }
    [[nodiscard]] double time(Index k) const noexcept { return t0 + static_cast<double>(k) * dt; }

    /// Rows [first, first + count) as a new trajectory on the matching sub-grid.
    [[nodiscard]] TrajectoryData slice(Index first, Index count) const;
    /// A single channel as a one-column trajectory.
    [[nodiscard]] TrajectoryData channel(Index c) const;

    /// Throws std::invalid_argument unless dt > 0 and every value is finite.
    void validate() const;

    /// `time,ch0[,ch1,...]`, one row per sample, 17 significant digits, LF endings.
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] static TrajectoryData from_csv(const std::filesystem::path& path);
};

} // namespace bwl
