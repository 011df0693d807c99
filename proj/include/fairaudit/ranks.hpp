#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fairaudit {

/// Midranks of a pooled sample, in the order the values were supplied.
struct RankedPool {
    std::vector<double> ranks;
    std::size_t n = 0;
    /// Sizes of every group of tied values (each entry >= 2).
    std::vector<std::size_t> tie_census;

    /// Sum over the census of t^3 - t.
    double tie_sum() const;
};

/// Ranks 1..N with ties receiving the mean of the ranks they span.
/// Throws DataError on empty input or non-finite values.
RankedPool midranks(std::span<const double> values);

/// 1 - sum(t^3 - t) / (N^3 - N); equals 1 without ties and 0 when every value is equal.
double tie_correction(const RankedPool& pool);

}  // namespace fairaudit
