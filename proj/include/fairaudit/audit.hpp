#pragma once

// End-to-end bias audit over per-sample (group, label, prediction) rows.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/omnibus.hpp"
#include "fairaudit/posthoc.hpp"

namespace fairaudit {

struct ScoreScale {
    double min = 0.0;
    double max = 1.0;

    bool operator==(const ScoreScale&) const = default;
};

struct Observation {
    std::string id;
    std::string group;
    /// Ground-truth score on [0, 1]; absent for unlabeled rows.
    std::optional<double> label;
    double prediction = 0.0;
};

struct ObservationTable {
    std::vector<Observation> rows;
    /// Scale the labels were declared on before normalization.
    ScoreScale label_scale;

    bool fully_labeled() const;
    bool any_labeled() const;
    /// Throws DataError on non-finite values, empty group names or mixed label coverage.
    void validate() const;
};

struct GroupStats {
    std::string group;
    std::size_t n = 0;
    double prediction_mean = 0.0;
    double prediction_median = 0.0;
    std::optional<double> error_mean;
    std::optional<double> error_median;
};

/// Per-group statistics in lexicographic group order.
using GroupDescriptives = std::vector<GroupStats>;

struct AuditConfig {
    double alpha = 0.05;
    /// Tests to run; empty selects MWU + KS for two groups and KW + permutation otherwise.
    std::vector<TestKind> tests;
    Adjustment adjustment = Adjustment::benjamini_hochberg;
    std::size_t permutations = 4999;
    std::uint64_t seed = 42;
    bool continuity = false;
    ScoreScale label_scale;
    /// Threads for the permutation test; results do not depend on this.
    unsigned workers = 1;

    /// Throws ConfigError.
    void validate() const;
};

/// Omnibus tests, post hoc matrix and parity summary for one analysed quantity
/// (predictions or errors).
struct TargetAnalysis {
    std::vector<TestResult> omnibus;
    std::optional<PairwiseMatrix> pairwise;
    ParitySummary parity;
};

struct RegressionMetrics {
    double mse = 0.0;
    double rmse = 0.0;
};

struct AuditReport {
    AuditConfig config;
    GroupDescriptives descriptives;
    /// Groups that entered the tests (n >= 2), lexicographic.
    std::vector<std::string> groups;
    std::vector<std::string> excluded_groups;
    TargetAnalysis predictions;
    /// Present iff every row is labeled.
    std::optional<TargetAnalysis> errors;
    std::optional<RegressionMetrics> regression;
    std::vector<std::string> warnings;
};

/// (x - min) / (max - min). Throws DomainError for a bad scale or out-of-scale values.
std::vector<double> normalize_scores(std::span<const double> values, double scale_min,
                                     double scale_max);

/// prediction - label per row (positive means overestimation). Throws DataError when a label is missing.
std::vector<double> compute_errors(const ObservationTable& table);

RegressionMetrics regression_metrics(const ObservationTable& table);

/// RMSE expressed on a [0, 1] scale.
double rescale_rmse(double rmse, double scale_min, double scale_max);

double mean(std::span<const double> values);
double median(std::span<const double> values);

GroupDescriptives group_descriptives(const ObservationTable& table);

AuditReport run_audit(const ObservationTable& table, const AuditConfig& config);

}  // namespace fairaudit
