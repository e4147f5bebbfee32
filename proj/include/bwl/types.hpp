#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace bwl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Half-open row range [begin, end).
struct IndexRange {
    Index begin = 0;
    Index end = 0;

    [[nodiscard]] Index size() const noexcept { return end > begin ? end - begin : 0; }
    [[nodiscard]] bool empty() const noexcept { return size() == 0; }
    [[nodiscard]] bool contains(Index k) const noexcept { return k >= begin && k < end; }
};

} // namespace bwl
