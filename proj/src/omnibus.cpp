#include "fairaudit/omnibus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "fairaudit/errors.hpp"
#include "fairaudit/random.hpp"
#include "fairaudit/ranks.hpp"
#include "fairaudit/specfun.hpp"

namespace fairaudit {

namespace {

std::vector<double> pooled(std::span<const double> a, std::span<const double> b) {
    std::vector<double> pool;
    pool.reserve(a.size() + b.size());
    pool.insert(pool.end(), a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    return pool;
}

void require_two_samples(std::span<const double> a, std::span<const double> b,
                         std::string_view who) {
    if (a.empty() || b.empty()) {
        throw DataError(std::string(who) + ": both samples must be non-empty");
    }
}

void require_groups(std::span<const Sample> groups, std::string_view who) {
    if (groups.size() < 2) throw DataError(std::string(who) + ": need at least 2 groups");
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) {
            throw DataError(std::string(who) + ": group " + std::to_string(g) + " is empty");
        }
    }
}

double two_sided_normal_p(double deviation, double sd) {
    return std::min(1.0, 2.0 * specfun::std_normal_sf(std::fabs(deviation) / sd));
}

}  // namespace

std::string_view to_string(TestKind kind) {
    switch (kind) {
        case TestKind::mwu: return "mwu";
        case TestKind::ks: return "ks";
        case TestKind::kruskal_wallis: return "kruskal_wallis";
        case TestKind::permutation: return "permutation";
    }
    return "unknown";
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          bool continuity) {
    require_two_samples(a, b, "mann_whitney_u");
    const auto pool = pooled(a, b);
    const RankedPool ranked = midranks(pool);

    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    const double n = na + nb;
    const double rank_sum_a =
        std::accumulate(ranked.ranks.begin(), ranked.ranks.begin() + a.size(), 0.0);

    TestResult result;
    result.test = TestKind::mwu;
    result.statistic = rank_sum_a - na * (na + 1.0) / 2.0;
    result.group_sizes = {a.size(), b.size()};
    result.options.continuity = continuity;

    const double mu = na * nb / 2.0;
    const double variance = na * nb / 12.0 * ((n + 1.0) - ranked.tie_sum() / (n * (n - 1.0)));
    if (!(variance > 0.0)) {
        result.p_value = 1.0;
        result.z = 0.0;
        result.warnings.emplace_back("degenerate_variance");
        return result;
    }
    double deviation = result.statistic - mu;
    if (continuity) {
        deviation = std::copysign(std::max(0.0, std::fabs(deviation) - 0.5), deviation);
    }
    const double sd = std::sqrt(variance);
    result.z = deviation / sd;
    result.p_value = two_sided_normal_p(deviation, sd);
    return result;
}

double mwu_p_from_statistic(double u, std::size_t n_a, std::size_t n_b) {
    if (n_a == 0 || n_b == 0) throw DomainError("mwu_p_from_statistic: empty sample size");
    const auto na = static_cast<double>(n_a);
    const auto nb = static_cast<double>(n_b);
    if (!(u >= 0.0 && u <= na * nb)) {
        throw DomainError("mwu_p_from_statistic: U outside [0, n_a n_b]");
    }
    const double variance = na * nb * (na + nb + 1.0) / 12.0;
    return two_sided_normal_p(u - na * nb / 2.0, std::sqrt(variance));
}

double exact_mwu_p(std::span<const double> a, std::span<const double> b) {
    require_two_samples(a, b, "exact_mwu_p");
    const std::size_t n = a.size() + b.size();
    if (n > kExactMwuMaxN) {
        throw DomainError("exact_mwu_p: pooled size " + std::to_string(n) +
                          " exceeds enumeration bound " + std::to_string(kExactMwuMaxN));
    }
    const RankedPool ranked = midranks(pooled(a, b));
    const auto na = static_cast<double>(a.size());
    const double offset = na * (na + 1.0) / 2.0;
    const double mu = na * static_cast<double>(b.size()) / 2.0;
    const double observed =
        std::accumulate(ranked.ranks.begin(), ranked.ranks.begin() + a.size(), 0.0) - offset;
    // Ranks are multiples of 1/2, so every U below is exact in double precision.
    const double observed_dev = std::fabs(observed - mu);

    std::uint64_t extreme = 0;
    std::uint64_t total = 0;
    const std::uint32_t limit = std::uint32_t{1} << n;
    // Gosper's hack: visit every n-bit mask with exactly |a| bits set.
    std::uint32_t mask = (std::uint32_t{1} << a.size()) - 1;
    while (mask < limit) {
        double rank_sum = 0.0;
        for (std::uint32_t bits = mask; bits != 0; bits &= bits - 1) {
            rank_sum += ranked.ranks[static_cast<std::size_t>(std::countr_zero(bits))];
        }
        ++total;
        if (std::fabs(rank_sum - offset - mu) >= observed_dev) ++extreme;
        const std::uint32_t lowest = mask & (~mask + 1);
        const std::uint32_t ripple = mask + lowest;
        mask = (((ripple ^ mask) >> 2) / lowest) | ripple;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

double ks_p_from_statistic(double d, std::size_t n_a, std::size_t n_b) {
    if (n_a == 0 || n_b == 0) throw DomainError("ks_p_from_statistic: empty sample size");
    if (!(d >= 0.0 && d <= 1.0)) throw DomainError("ks_p_from_statistic: D outside [0, 1]");
    const auto na = static_cast<double>(n_a);
    const auto nb = static_cast<double>(n_b);
    const double root_ne = std::sqrt(na * nb / (na + nb));
    return specfun::kolmogorov_sf((root_ne + 0.12 + 0.11 / root_ne) * d);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    require_two_samples(a, b, "ks_two_sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    // Track |F_a - F_b| through the integer numerator |i nb - j na| so D is
    // exactly reproducible under monotone transforms.
    const auto na = static_cast<std::int64_t>(sa.size());
    const auto nb = static_cast<std::int64_t>(sb.size());
    std::int64_t i = 0;
    std::int64_t j = 0;
    std::int64_t best = 0;
    while (i < na && j < nb) {
        const double x = std::min(sa[static_cast<std::size_t>(i)], sb[static_cast<std::size_t>(j)]);
        while (i < na && sa[static_cast<std::size_t>(i)] == x) ++i;
        while (j < nb && sb[static_cast<std::size_t>(j)] == x) ++j;
        best = std::max(best, std::abs(i * nb - j * na));
    }

    TestResult result;
    result.test = TestKind::ks;
    result.statistic = static_cast<double>(best) / static_cast<double>(na * nb);
    result.group_sizes = {a.size(), b.size()};
    result.p_value = ks_p_from_statistic(result.statistic, a.size(), b.size());
    return result;
}

TestResult kruskal_wallis(std::span<const Sample> groups) {
    require_groups(groups, "kruskal_wallis");
    std::vector<double> pool;
    TestResult result;
    result.test = TestKind::kruskal_wallis;
    for (const auto& g : groups) {
        pool.insert(pool.end(), g.begin(), g.end());
        result.group_sizes.push_back(g.size());
    }
    if (pool.size() < 3) throw DataError("kruskal_wallis: need at least 3 observations");

    const RankedPool ranked = midranks(pool);
    const auto n = static_cast<double>(pool.size());
    const double centre = (n + 1.0) / 2.0;
    double between = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        const double rank_sum = std::accumulate(ranked.ranks.begin() + offset,
                                                ranked.ranks.begin() + offset + g.size(), 0.0);
        const auto ni = static_cast<double>(g.size());
        const double dev = rank_sum / ni - centre;
        between += ni * dev * dev;
        offset += g.size();
    }

    const double c = tie_correction(ranked);
    if (!(c > 0.0)) {
        result.statistic = 0.0;
        result.p_value = 1.0;
        result.warnings.emplace_back("degenerate_variance");
        return result;
    }
    result.statistic = 12.0 / (n * (n + 1.0)) * between / c;
    result.p_value = specfun::chi2_sf(result.statistic, static_cast<int>(groups.size()) - 1);
    return result;
}

namespace {

// Sum over groups of S_i^2 / n_i minus S^2 / N, for values already centred on the pooled mean.
double between_group_ss(std::span<const double> values, std::span<const std::size_t> order,
                        std::span<const std::size_t> sizes) {
    double total = 0.0;
    double ss = 0.0;
    std::size_t pos = 0;
    for (const std::size_t size : sizes) {
        double sum = 0.0;
        for (std::size_t m = 0; m < size; ++m) sum += values[order[pos + m]];
        ss += sum * sum / static_cast<double>(size);
        total += sum;
        pos += size;
    }
    return std::max(0.0, ss - total * total / static_cast<double>(values.size()));
}

}  // namespace

TestResult permutation_location_test(std::span<const Sample> groups, std::size_t permutations,
                                     std::uint64_t seed, unsigned workers) {
    require_groups(groups, "permutation_location_test");
    if (permutations < kMinPermutations) {
        throw ConfigError("permutation_location_test: need at least " +
                          std::to_string(kMinPermutations) + " permutations");
    }

    TestResult result;
    result.test = TestKind::permutation;
    result.options.permutations = permutations;
    result.options.seed = seed;

    std::vector<double> values;
    for (const auto& g : groups) {
        values.insert(values.end(), g.begin(), g.end());
        result.group_sizes.push_back(g.size());
    }
    for (const double v : values) {
        if (!std::isfinite(v)) throw DataError("permutation_location_test: non-finite value");
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
    for (double& v : values) v -= mean;

    std::vector<std::size_t> identity(values.size());
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    const double observed = between_group_ss(values, identity, result.group_sizes);
    result.statistic = observed;
    // Relabelings equal to the observed partition must count as exceedances even
    // when summation order perturbs the last bits.
    const double threshold = observed - 1e-9 * std::max(observed, 1e-300);

    const unsigned n_workers = std::max(1u, std::min<unsigned>(
        workers, static_cast<unsigned>(std::min<std::size_t>(permutations, 64))));
    std::vector<std::uint64_t> counts(n_workers, 0);
    auto run_range = [&](unsigned worker, std::size_t begin, std::size_t end) {
        std::vector<std::size_t> order(values.size());
        std::uint64_t count = 0;
        for (std::size_t b = begin; b < end; ++b) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            auto rng = SplitMix64::substream(seed, b);
            for (std::size_t i = order.size() - 1; i > 0; --i) {
                std::swap(order[i], order[rng.below(i + 1)]);
            }
            if (between_group_ss(values, order, result.group_sizes) >= threshold) ++count;
        }
        counts[worker] = count;
    };

    if (n_workers == 1) {
        run_range(0, 0, permutations);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (permutations + n_workers - 1) / n_workers;
        for (unsigned w = 0; w < n_workers; ++w) {
            const std::size_t begin = std::min(permutations, w * chunk);
            const std::size_t end = std::min(permutations, begin + chunk);
            pool.emplace_back(run_range, w, begin, end);
        }
    }
    const std::uint64_t exceed = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    result.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + permutations);
    if (observed == 0.0) result.warnings.emplace_back("zero_between_group_variation");
    return result;
}

}  // namespace fairaudit
