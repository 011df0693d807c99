#include "fairaudit/posthoc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairaudit/errors.hpp"
#include "fairaudit/ranks.hpp"
#include "fairaudit/specfun.hpp"

namespace fairaudit {

std::string_view to_string(Adjustment method) {
    switch (method) {
        case Adjustment::benjamini_hochberg: return "benjamini_hochberg";
        case Adjustment::bonferroni: return "bonferroni";
        case Adjustment::none: return "none";
    }
    return "unknown";
}

Adjustment parse_adjustment(std::string_view name) {
    if (name == "bh" || name == "benjamini_hochberg" || name == "fdr_bh") {
        return Adjustment::benjamini_hochberg;
    }
    if (name == "bonferroni") return Adjustment::bonferroni;
    if (name == "none") return Adjustment::none;
    throw ConfigError("unknown adjustment method '" + std::string(name) + "'");
}

std::string_view to_string(ParityCriterion criterion) {
    return criterion == ParityCriterion::distributional ? "distributional" : "error";
}

PairwiseMatrix dunn_pairwise(std::span<const Sample> groups, std::vector<std::string> names) {
    if (groups.size() < 2) throw DataError("dunn_pairwise: need at least 2 groups");
    const std::size_t k = groups.size();
    if (names.empty()) {
        for (std::size_t g = 0; g < k; ++g) names.push_back(std::to_string(g));
    }
    if (names.size() != k) throw DataError("dunn_pairwise: one name per group required");

    std::vector<double> pool;
    for (std::size_t g = 0; g < k; ++g) {
        if (groups[g].empty()) throw DataError("dunn_pairwise: group '" + names[g] + "' is empty");
        pool.insert(pool.end(), groups[g].begin(), groups[g].end());
    }
    const RankedPool ranked = midranks(pool);

    std::vector<double> mean_rank(k);
    std::size_t offset = 0;
    for (std::size_t g = 0; g < k; ++g) {
        const double sum = std::accumulate(ranked.ranks.begin() + offset,
                                           ranked.ranks.begin() + offset + groups[g].size(), 0.0);
        mean_rank[g] = sum / static_cast<double>(groups[g].size());
        offset += groups[g].size();
    }

    PairwiseMatrix out;
    out.groups = std::move(names);
    out.z = SquareMatrix(k, 0.0);
    out.p_raw = SquareMatrix(k, 1.0);

    const auto n = static_cast<double>(pool.size());
    const double variance =
        pool.size() > 1 ? n * (n + 1.0) / 12.0 - ranked.tie_sum() / (12.0 * (n - 1.0)) : 0.0;
    if (!(variance > 0.0)) {
        out.warnings.emplace_back("degenerate_variance");
        return out;
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const double se = std::sqrt(variance * (1.0 / static_cast<double>(groups[i].size()) +
                                                    1.0 / static_cast<double>(groups[j].size())));
            const double z = (mean_rank[i] - mean_rank[j]) / se;
            const double p = std::min(1.0, 2.0 * specfun::std_normal_sf(std::fabs(z)));
            out.z(i, j) = z;
            out.z(j, i) = -z;
            out.p_raw(i, j) = p;
            out.p_raw(j, i) = p;
        }
    }
    return out;
}

namespace {

void validate_p_values(std::span<const double> p_values, std::string_view who) {
    if (p_values.empty()) throw DomainError(std::string(who) + ": no p-values");
    for (const double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError(std::string(who) + ": p-value outside [0, 1]");
        }
    }
}

}  // namespace

std::vector<double> adjust_bh(std::span<const double> p_values) {
    validate_p_values(p_values, "adjust_bh");
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t lhs, std::size_t rhs) { return p_values[lhs] < p_values[rhs]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const std::size_t idx = order[r];
        const double scaled = p_values[idx] * static_cast<double>(m) / static_cast<double>(r + 1);
        running = std::min(running, scaled);
        // p * m / r can round below p when r == m.
        adjusted[idx] = std::max(running, p_values[idx]);
    }
    return adjusted;
}

std::vector<double> adjust_bonferroni(std::span<const double> p_values) {
    validate_p_values(p_values, "adjust_bonferroni");
    const auto m = static_cast<double>(p_values.size());
    std::vector<double> adjusted;
    adjusted.reserve(p_values.size());
    for (const double p : p_values) adjusted.push_back(std::min(1.0, p * m));
    return adjusted;
}

std::vector<double> adjust(std::span<const double> p_values, Adjustment method) {
    switch (method) {
        case Adjustment::benjamini_hochberg: return adjust_bh(p_values);
        case Adjustment::bonferroni: return adjust_bonferroni(p_values);
        case Adjustment::none: break;
    }
    validate_p_values(p_values, "adjust");
    return {p_values.begin(), p_values.end()};
}

void apply_adjustment(PairwiseMatrix& matrix, Adjustment method) {
    const std::size_t k = matrix.k();
    std::vector<double> family;
    family.reserve(matrix.pair_count());
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) family.push_back(matrix.p_raw(i, j));
    }
    const std::vector<double> adjusted = adjust(family, method);

    SquareMatrix out(k, 1.0);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            out(i, j) = adjusted[pos];
            out(j, i) = adjusted[pos];
            ++pos;
        }
    }
    matrix.p_adjusted = std::move(out);
    matrix.adjustment = method;
}

ParitySummary parity_fraction(const PairwiseMatrix& matrix, double alpha,
                              ParityCriterion criterion) {
    if (!matrix.p_adjusted) throw DataError("parity_fraction: adjusted p-values not computed");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("parity_fraction: alpha must be in (0, 1)");

    ParitySummary summary;
    summary.criterion = criterion;
    summary.alpha = alpha;
    const auto& p = *matrix.p_adjusted;
    for (std::size_t i = 0; i < matrix.k(); ++i) {
        for (std::size_t j = i + 1; j < matrix.k(); ++j) {
            const bool ok = p(i, j) >= alpha;
            summary.pair_verdicts.push_back({matrix.groups[i], matrix.groups[j], p(i, j), ok});
            if (ok) ++summary.satisfied_count;
        }
    }
    summary.total_pairs = summary.pair_verdicts.size();
    summary.fraction = summary.total_pairs == 0
                           ? 0.0
                           : static_cast<double>(summary.satisfied_count) /
                                 static_cast<double>(summary.total_pairs);
    return summary;
}

double rounded_fraction(const ParitySummary& summary) {
    return std::round(summary.fraction * 1000.0) / 1000.0;
}

}  // namespace fairaudit
