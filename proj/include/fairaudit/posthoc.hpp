#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/omnibus.hpp"

namespace fairaudit {

enum class Adjustment { benjamini_hochberg, bonferroni, none };

std::string_view to_string(Adjustment method);
/// Accepts "bh", "benjamini_hochberg", "bonferroni", "none". Throws ConfigError otherwise.
Adjustment parse_adjustment(std::string_view name);

/// Dense row-major k x k matrix.
class SquareMatrix {
public:
    SquareMatrix() = default;
    SquareMatrix(std::size_t k, double fill) : k_(k), data_(k * k, fill) {}

    std::size_t size() const { return k_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * k_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * k_ + j]; }

    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t k_ = 0;
    std::vector<double> data_;
};

/// Pairwise Dunn comparisons over k groups.
///
/// z is antisymmetric, the p matrices are symmetric with a unit diagonal.
/// p_adjusted stays empty until an adjustment is applied.
struct PairwiseMatrix {
    std::vector<std::string> groups;
    SquareMatrix z;
    SquareMatrix p_raw;
    std::optional<SquareMatrix> p_adjusted;
    std::optional<Adjustment> adjustment;
    std::vector<std::string> warnings;

    std::size_t k() const { return groups.size(); }
    std::size_t pair_count() const { return k() * (k() - 1) / 2; }
};

enum class ParityCriterion { distributional, error };

std::string_view to_string(ParityCriterion criterion);

struct PairVerdict {
    std::string group_a;
    std::string group_b;
    double p_adjusted = 1.0;
    bool satisfied = true;
};

struct ParitySummary {
    ParityCriterion criterion = ParityCriterion::distributional;
    double alpha = 0.05;
    std::vector<PairVerdict> pair_verdicts;
    std::size_t satisfied_count = 0;
    std::size_t total_pairs = 0;
    double fraction = 0.0;
};

/// Dunn z statistics and raw two-sided p on pooled midranks with
/// tie-corrected variance. `names` defaults to "0", "1", ...
PairwiseMatrix dunn_pairwise(std::span<const Sample> groups,
                             std::vector<std::string> names = {});

/// Benjamini-Hochberg adjusted p-values, returned in input order.
std::vector<double> adjust_bh(std::span<const double> p_values);

/// min(p m, 1) for each value.
std::vector<double> adjust_bonferroni(std::span<const double> p_values);

/// Dispatch on `method`; Adjustment::none validates and copies.
std::vector<double> adjust(std::span<const double> p_values, Adjustment method);

/// Adjusts the k(k-1)/2 upper-triangle p-values as one family and mirrors them.
void apply_adjustment(PairwiseMatrix& matrix, Adjustment method);

/// Pairs with adjusted p >= alpha satisfy parity. Throws if p_adjusted is unset.
ParitySummary parity_fraction(const PairwiseMatrix& matrix, double alpha,
                              ParityCriterion criterion = ParityCriterion::distributional);

/// Fraction rounded to 3 decimals, as reported.
double rounded_fraction(const ParitySummary& summary);

}  // namespace fairaudit
