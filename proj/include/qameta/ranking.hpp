#pragma once

#include <cstddef>
#include <span>

namespace qameta {

/// Index of the largest score. Exact ties go to the higher priority, then the
/// lower index. When every score is zero the fallback index is returned.
std::size_t argmax_with_priority(std::span<const double> scores, std::span<const double> priority,
                                 std::size_t fallback);

}  // namespace qameta
