#include "fairaudit/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fairaudit/errors.hpp"

namespace fairaudit {

double RankedPool::tie_sum() const {
    double sum = 0.0;
    for (const std::size_t t : tie_census) {
        const auto td = static_cast<double>(t);
        sum += td * td * td - td;
    }
    return sum;
}

RankedPool midranks(std::span<const double> values) {
    if (values.empty()) throw DataError("midranks: empty sample");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw DataError("midranks: non-finite value at position " + std::to_string(i));
        }
    }

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t lhs, std::size_t rhs) { return values[lhs] < values[rhs]; });

    RankedPool pool;
    pool.n = values.size();
    pool.ranks.resize(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        // positions i..j-1 share ranks i+1..j
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t m = i; m < j; ++m) pool.ranks[order[m]] = rank;
        if (j - i > 1) pool.tie_census.push_back(j - i);
        i = j;
    }
    return pool;
}

double tie_correction(const RankedPool& pool) {
    if (pool.n < 2) throw DataError("tie_correction: need at least 2 observations");
    const auto n = static_cast<double>(pool.n);
    const double c = 1.0 - pool.tie_sum() / (n * n * n - n);
    return std::clamp(c, 0.0, 1.0);
}

}  // namespace fairaudit
