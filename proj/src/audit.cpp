#include "fairaudit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "fairaudit/errors.hpp"

namespace fairaudit {

bool ObservationTable::fully_labeled() const {
    return !rows.empty() &&
           std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.label.has_value(); });
}

bool ObservationTable::any_labeled() const {
    return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.label.has_value(); });
}

void ObservationTable::validate() const {
    if (rows.empty()) throw DataError("observation table is empty");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.group.empty()) throw DataError("row " + std::to_string(i) + ": empty group name");
        if (!std::isfinite(row.prediction)) {
            throw DataError("row " + std::to_string(i) + ": non-finite prediction");
        }
        if (row.label && !std::isfinite(*row.label)) {
            throw DataError("row " + std::to_string(i) + ": non-finite label");
        }
    }
    if (any_labeled() && !fully_labeled()) {
        throw DataError("labels present on some rows only; label coverage must be all or none");
    }
}

void AuditConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (permutations < kMinPermutations) {
        throw ConfigError("permutation count must be at least " + std::to_string(kMinPermutations));
    }
    if (!(label_scale.max > label_scale.min)) throw ConfigError("label scale max must exceed min");
}

std::vector<double> normalize_scores(std::span<const double> values, double scale_min,
                                     double scale_max) {
    if (!(scale_max > scale_min)) throw DomainError("normalize_scores: scale max must exceed min");
    const double width = scale_max - scale_min;
    std::vector<double> out;
    out.reserve(values.size());
    for (const double v : values) {
        if (!(v >= scale_min && v <= scale_max)) {
            throw DomainError("normalize_scores: value " + std::to_string(v) + " outside [" +
                              std::to_string(scale_min) + ", " + std::to_string(scale_max) + "]");
        }
        out.push_back(std::clamp((v - scale_min) / width, 0.0, 1.0));
    }
    return out;
}

std::vector<double> compute_errors(const ObservationTable& table) {
    std::vector<double> errors;
    errors.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (!row.label) throw DataError("row " + std::to_string(i) + " has no label");
        errors.push_back(row.prediction - *row.label);
    }
    return errors;
}

RegressionMetrics regression_metrics(const ObservationTable& table) {
    const std::vector<double> errors = compute_errors(table);
    if (errors.empty()) throw DataError("regression_metrics: empty table");
    double sq = 0.0;
    for (const double e : errors) sq += e * e;
    RegressionMetrics m;
    m.mse = sq / static_cast<double>(errors.size());
    m.rmse = std::sqrt(m.mse);
    return m;
}

double rescale_rmse(double rmse, double scale_min, double scale_max) {
    if (!(scale_max > scale_min)) throw DomainError("rescale_rmse: scale max must exceed min");
    if (!(rmse >= 0.0)) throw DomainError("rescale_rmse: rmse must be nonnegative");
    return rmse / (scale_max - scale_min);
}

double mean(std::span<const double> values) {
    if (values.empty()) throw DataError("mean of empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::span<const double> values) {
    if (values.empty()) throw DataError("median of empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    return sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

namespace {

struct GroupedValues {
    std::vector<std::string> names;
    std::vector<Sample> predictions;
    std::vector<Sample> errors;
};

GroupedValues group_rows(const ObservationTable& table, bool with_errors) {
    // std::map keeps groups in lexicographic order.
    std::map<std::string, std::pair<Sample, Sample>> by_group;
    for (const auto& row : table.rows) {
        auto& [preds, errs] = by_group[row.group];
        preds.push_back(row.prediction);
        if (with_errors) errs.push_back(row.prediction - *row.label);
    }
    GroupedValues out;
    for (auto& [name, values] : by_group) {
        out.names.push_back(name);
        out.predictions.push_back(std::move(values.first));
        out.errors.push_back(std::move(values.second));
    }
    return out;
}

void collect_warnings(std::vector<std::string>& sink, std::string_view target,
                      std::string_view test, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) {
        sink.push_back(std::string(target) + "." + std::string(test) + ": " + w);
    }
}

bool is_two_sample(TestKind kind) { return kind == TestKind::mwu || kind == TestKind::ks; }

TargetAnalysis analyse(std::span<const Sample> groups, const std::vector<std::string>& names,
                       const std::vector<TestKind>& tests, const AuditConfig& config,
                       ParityCriterion criterion, std::string_view target,
                       std::vector<std::string>& warnings) {
    TargetAnalysis analysis;
    const bool two_groups = groups.size() == 2;
    for (const TestKind kind : tests) {
        TestResult result;
        switch (kind) {
            case TestKind::mwu:
                result = mann_whitney_u(groups[0], groups[1], config.continuity);
                break;
            case TestKind::ks:
                result = ks_two_sample(groups[0], groups[1]);
                break;
            case TestKind::kruskal_wallis:
                result = kruskal_wallis(groups);
                break;
            case TestKind::permutation:
                result = permutation_location_test(groups, config.permutations, config.seed,
                                                   config.workers);
                break;
        }
        collect_warnings(warnings, target, to_string(kind), result.warnings);
        analysis.omnibus.push_back(std::move(result));
    }

    if (!two_groups) {
        PairwiseMatrix matrix = dunn_pairwise(groups, names);
        apply_adjustment(matrix, config.adjustment);
        collect_warnings(warnings, target, "dunn", matrix.warnings);
        analysis.parity = parity_fraction(matrix, config.alpha, criterion);
        analysis.pairwise = std::move(matrix);
        return analysis;
    }

    // A single pair: the family has one member, so the first omnibus p is its own adjusted p.
    ParitySummary parity;
    parity.criterion = criterion;
    parity.alpha = config.alpha;
    const double p = analysis.omnibus.empty() ? 1.0 : analysis.omnibus.front().p_value;
    const bool ok = p >= config.alpha;
    parity.pair_verdicts.push_back({names[0], names[1], p, ok});
    parity.satisfied_count = ok ? 1 : 0;
    parity.total_pairs = 1;
    parity.fraction = ok ? 1.0 : 0.0;
    analysis.parity = std::move(parity);
    return analysis;
}

}  // namespace

GroupDescriptives group_descriptives(const ObservationTable& table) {
    if (table.rows.empty()) throw DataError("group_descriptives: empty table");
    const bool labeled = table.fully_labeled();
    const GroupedValues grouped = group_rows(table, labeled);
    GroupDescriptives out;
    for (std::size_t g = 0; g < grouped.names.size(); ++g) {
        GroupStats stats;
        stats.group = grouped.names[g];
        stats.n = grouped.predictions[g].size();
        stats.prediction_mean = mean(grouped.predictions[g]);
        stats.prediction_median = median(grouped.predictions[g]);
        if (labeled) {
            stats.error_mean = mean(grouped.errors[g]);
            stats.error_median = median(grouped.errors[g]);
        }
        out.push_back(std::move(stats));
    }
    return out;
}

AuditReport run_audit(const ObservationTable& table, const AuditConfig& config) {
    config.validate();
    table.validate();

    AuditReport report;
    report.config = config;
    report.descriptives = group_descriptives(table);

    const bool labeled = table.fully_labeled();
    GroupedValues all = group_rows(table, labeled);
    GroupedValues kept;
    for (std::size_t g = 0; g < all.names.size(); ++g) {
        if (all.predictions[g].size() < 2) {
            report.excluded_groups.push_back(all.names[g]);
            report.warnings.push_back("group '" + all.names[g] +
                                      "' excluded: fewer than 2 observations");
            continue;
        }
        kept.names.push_back(std::move(all.names[g]));
        kept.predictions.push_back(std::move(all.predictions[g]));
        kept.errors.push_back(std::move(all.errors[g]));
    }
    if (kept.names.size() < 2) {
        throw DataError("audit needs at least 2 groups with 2 or more observations, found " +
                        std::to_string(kept.names.size()));
    }
    report.groups = kept.names;

    std::vector<TestKind> tests;
    if (config.tests.empty()) {
        tests = kept.names.size() == 2
                    ? std::vector<TestKind>{TestKind::mwu, TestKind::ks}
                    : std::vector<TestKind>{TestKind::kruskal_wallis, TestKind::permutation};
    } else {
        for (const TestKind kind : config.tests) {
            if (std::find(tests.begin(), tests.end(), kind) != tests.end()) continue;
            if (is_two_sample(kind) && kept.names.size() != 2) {
                report.warnings.push_back(std::string(to_string(kind)) +
                                          " skipped: requires exactly 2 groups, found " +
                                          std::to_string(kept.names.size()));
                continue;
            }
            tests.push_back(kind);
        }
    }

    report.predictions = analyse(kept.predictions, kept.names, tests, config,
                                 ParityCriterion::distributional, "predictions", report.warnings);
    if (labeled) {
        report.errors = analyse(kept.errors, kept.names, tests, config, ParityCriterion::error,
                                "errors", report.warnings);
        report.regression = regression_metrics(table);
    } else {
        report.warnings.emplace_back("labels absent: error-side tests and error parity skipped");
    }
    return report;
}

}  // namespace fairaudit
