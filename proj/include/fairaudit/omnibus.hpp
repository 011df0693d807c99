#pragma once

// Two-sample and k-sample location/distribution tests. All p-values are
// two-sided.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

enum class TestKind { mwu, ks, kruskal_wallis, permutation };

std::string_view to_string(TestKind kind);

/// Method switches echoed alongside each result.
struct TestOptions {
    bool continuity = false;
    std::optional<std::size_t> permutations;
    std::optional<std::uint64_t> seed;
};

struct TestResult {
    TestKind test = TestKind::mwu;
    double statistic = 0.0;
    double p_value = 1.0;
    std::vector<std::size_t> group_sizes;
    TestOptions options;
    /// Standardized statistic, set by the normal-approximation tests.
    std::optional<double> z;
    /// Machine-readable notes about degenerate inputs (e.g. "degenerate_variance").
    std::vector<std::string> warnings;
};

using Sample = std::vector<double>;

/// Mann-Whitney U for sample `a` against `b`. The reported statistic is U_a;
/// the p-value uses the tie-corrected normal approximation.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          bool continuity = false);

/// Two-sided normal-approximation p for a known U with tie-free variance.
double mwu_p_from_statistic(double u, std::size_t n_a, std::size_t n_b);

/// Exact two-sided MWU p by enumerating every group assignment. n_a + n_b <= 16.
double exact_mwu_p(std::span<const double> a, std::span<const double> b);

/// Largest pooled sample accepted by exact_mwu_p.
inline constexpr std::size_t kExactMwuMaxN = 16;

/// Two-sample Kolmogorov-Smirnov D with the asymptotic p-value.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic p for a given D using lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D.
double ks_p_from_statistic(double d, std::size_t n_a, std::size_t n_b);

/// Kruskal-Wallis H (tie-corrected) referred to chi-square with k - 1 df.
TestResult kruskal_wallis(std::span<const Sample> groups);

/// Monte Carlo permutation test on the between-group sum of squares
/// T = sum n_i (mean_i - mean)^2. Permutation b draws its relabeling from a
/// substream keyed by (seed, b), so the result does not depend on `workers`.
TestResult permutation_location_test(std::span<const Sample> groups, std::size_t permutations,
                                     std::uint64_t seed, unsigned workers = 1);

/// Smallest permutation count accepted.
inline constexpr std::size_t kMinPermutations = 99;

}  // namespace fairaudit
