#include "bwl/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "bwl/csv.hpp"

namespace bwl {

TrajectoryData::TrajectoryData(double start, double step, Matrix samples)
    : t0(start), dt(step), values(std::move(samples)) {
    validate();
}

TrajectoryData TrajectoryData::slice(Index first, Index count) const {
    if (first < 0 || count < 0 || first + count > samples()) {
        throw std::out_of_range("trajectory slice out of range");
    }
    return TrajectoryData(time(first), dt, values.middleRows(first, count));
}

TrajectoryData TrajectoryData::channel(Index c) const {
    if (c < 0 || c >= channels()) throw std::out_of_range("trajectory channel out of range");
    return TrajectoryData(t0, dt, values.col(c));
}

void TrajectoryData::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("trajectory sample period must be positive");
    }
    if (!std::isfinite(t0)) throw std::invalid_argument("trajectory start time must be finite");
    if (!values.allFinite()) throw std::invalid_argument("trajectory contains non-finite values");
}

std::string TrajectoryData::to_csv() const {
    std::string out = "time";
    for (Index c = 0; c < channels(); ++c) out += ",ch" + std::to_string(c);
    out += '\n';
    for (Index k = 0; k < samples(); ++k) {
        out += csv::format_number(time(k));
        for (Index c = 0; c < channels(); ++c) {
            out += ',';
            out += csv::format_number(values(k, c));
        }
        out += '\n';
    }
    return out;
}

TrajectoryData TrajectoryData::from_csv(const std::filesystem::path& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header.empty() || table.header.front() != "time") {
        throw std::runtime_error("trajectory csv must start with a 'time' column");
    }
    if (table.rows.size() < 2) throw std::runtime_error("trajectory csv needs at least two rows");
    const auto m = static_cast<Index>(table.rows.size());
    const auto c = static_cast<Index>(table.header.size()) - 1;
    Matrix values(m, c);
    for (Index k = 0; k < m; ++k) {
        for (Index j = 0; j < c; ++j) {
            values(k, j) = table.number(static_cast<std::size_t>(k), static_cast<std::size_t>(j + 1));
        }
    }
    const double t0 = table.number(0, 0);
    const double dt = (table.number(table.rows.size() - 1, 0) - t0) / static_cast<double>(m - 1);
    return TrajectoryData(t0, dt, std::move(values));
}

} // namespace bwl
