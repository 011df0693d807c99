#include <cmath>
#include <vector>

#include <doctest.h>

#include "fairaudit/audit.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/io.hpp"
#include "table_gen.hpp"

using namespace fairaudit;
using V = std::vector<double>;

namespace {

ObservationTable labeled_rows(const std::vector<std::pair<double, double>>& pred_label) {
    ObservationTable t;
    for (std::size_t i = 0; i < pred_label.size(); ++i) {
        t.rows.push_back({"r" + std::to_string(i), "g", pred_label[i].second, pred_label[i].first});
    }
    return t;
}

}  // namespace

TEST_SUITE("audit helpers") {

TEST_CASE("normalize_scores") {
    CHECK(normalize_scores(V{3.0}, 1, 5) == V{0.5});
    CHECK(normalize_scores(V{1.0}, 1, 10) == V{0.0});
    CHECK(normalize_scores(V{5.5}, 1, 10) == V{0.5});
    CHECK(normalize_scores(V{10.0}, 1, 10) == V{1.0});
    CHECK_THROWS_AS(normalize_scores(V{0.5}, 1, 5), DomainError);
    CHECK_THROWS_AS(normalize_scores(V{5.01}, 1, 5), DomainError);
    CHECK_THROWS_AS(normalize_scores(V{1.0}, 5, 5), DomainError);
}

TEST_CASE("compute_errors sign convention") {
    const auto e = compute_errors(labeled_rows({{0.66, 0.59}, {0.4, 0.4}, {0.50, 0.53}}));
    CHECK(e[0] == doctest::Approx(0.07));
    CHECK(e[1] == 0.0);
    CHECK(e[2] == doctest::Approx(-0.03));

    ObservationTable partial = labeled_rows({{0.5, 0.5}});
    partial.rows.push_back({"x", "g", std::nullopt, 0.3});
    CHECK_THROWS_AS(compute_errors(partial), DataError);
}

TEST_CASE("regression_metrics") {
    const auto exact = regression_metrics(labeled_rows({{0.2, 0.2}, {0.9, 0.9}}));
    CHECK(exact.mse == 0.0);
    CHECK(exact.rmse == 0.0);
    const auto constant = regression_metrics(labeled_rows({{0.3, 0.2}, {0.6, 0.5}, {1.0, 0.9}}));
    CHECK(constant.mse == doctest::Approx(0.01));
    CHECK(constant.rmse == doctest::Approx(0.1));
    const auto signs = regression_metrics(labeled_rows({{0.6, 0.5}, {0.4, 0.5}}));
    CHECK(signs.mse == doctest::Approx(0.01));
}

TEST_CASE("rescale_rmse") {
    CHECK(rescale_rmse(0.302, 1, 5) == doctest::Approx(0.0755));
    CHECK(std::round(rescale_rmse(0.302, 1, 5) * 1000.0) / 1000.0 == 0.076);
    CHECK(rescale_rmse(0.0, 1, 10) == 0.0);
    CHECK(rescale_rmse(0.9, 1, 10) == doctest::Approx(0.1));
    CHECK_THROWS_AS(rescale_rmse(-0.1, 1, 5), DomainError);
    CHECK_THROWS_AS(rescale_rmse(0.1, 5, 1), DomainError);
}

TEST_CASE("mean and median") {
    CHECK(mean(V{0.2, 0.4}) == doctest::Approx(0.3));
    CHECK(median(V{0.2, 0.4}) == doctest::Approx(0.3));
    CHECK(median(V{1, 2, 100}) == 2.0);
    CHECK(median(V{0.4, 0.1, 0.3, 0.2}) == doctest::Approx(0.25));
    CHECK_THROWS_AS(median(V{}), DataError);
}

TEST_CASE("group_descriptives are sorted and labeled-aware") {
    ObservationTable t;
    t.rows = {{"1", "zeta", std::nullopt, 0.2}, {"2", "alpha", std::nullopt, 1.0},
              {"3", "zeta", std::nullopt, 0.4}, {"4", "alpha", std::nullopt, 2.0},
              {"5", "alpha", std::nullopt, 100.0}};
    const auto d = group_descriptives(t);
    REQUIRE(d.size() == 2);
    CHECK(d[0].group == "alpha");
    CHECK(d[0].n == 3);
    CHECK(d[0].prediction_median == 2.0);
    CHECK(d[1].group == "zeta");
    CHECK(d[1].prediction_mean == doctest::Approx(0.3));
    CHECK(d[1].prediction_median == doctest::Approx(0.3));
    CHECK_FALSE(d[1].error_mean.has_value());

    const auto labeled = group_descriptives(testgen::make_table(3, 10, 1, true));
    CHECK(labeled[0].error_mean.has_value());
    CHECK(labeled[0].error_median.has_value());
}

}  // TEST_SUITE

TEST_SUITE("run_audit") {

TEST_CASE("unlabeled seven-group table") {
    AuditConfig cfg;
    cfg.permutations = 199;
    const auto table = testgen::make_table(7, 40, 3, false, {0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12});
    const auto r = run_audit(table, cfg);
    REQUIRE(r.predictions.omnibus.size() == 2);
    CHECK(r.predictions.omnibus[0].test == TestKind::kruskal_wallis);
    CHECK(r.predictions.omnibus[1].test == TestKind::permutation);
    REQUIRE(r.predictions.pairwise.has_value());
    CHECK(r.predictions.pairwise->k() == 7);
    CHECK(r.predictions.pairwise->p_adjusted.has_value());
    CHECK(r.predictions.parity.total_pairs == 21);
    CHECK(r.predictions.parity.criterion == ParityCriterion::distributional);
    CHECK_FALSE(r.errors.has_value());
    CHECK_FALSE(r.regression.has_value());
    CHECK(r.groups.front() == "groupA");
}

TEST_CASE("labeled two-group table") {
    const auto table = testgen::make_table(2, 60, 4, true, {0.0, 0.05});
    const auto r = run_audit(table, AuditConfig{});
    REQUIRE(r.predictions.omnibus.size() == 2);
    CHECK(r.predictions.omnibus[0].test == TestKind::mwu);
    CHECK(r.predictions.omnibus[1].test == TestKind::ks);
    CHECK_FALSE(r.predictions.pairwise.has_value());
    REQUIRE(r.errors.has_value());
    CHECK(r.errors->omnibus.size() == 2);
    CHECK_FALSE(r.errors->pairwise.has_value());
    CHECK(r.errors->parity.criterion == ParityCriterion::error);
    CHECK(r.predictions.parity.total_pairs == 1);
    CHECK(r.predictions.parity.pair_verdicts[0].p_adjusted == r.predictions.omnibus[0].p_value);
    REQUIRE(r.regression.has_value());
    CHECK(r.regression->rmse == doctest::Approx(std::sqrt(r.regression->mse)));
}

TEST_CASE("test selection can be overridden") {
    AuditConfig cfg;
    cfg.tests = {TestKind::kruskal_wallis};
    const auto two = run_audit(testgen::make_table(2, 20, 5, false), cfg);
    REQUIRE(two.predictions.omnibus.size() == 1);
    CHECK(two.predictions.omnibus[0].test == TestKind::kruskal_wallis);

    cfg.tests = {TestKind::mwu, TestKind::kruskal_wallis};
    const auto four = run_audit(testgen::make_table(4, 20, 5, false), cfg);
    REQUIRE(four.predictions.omnibus.size() == 1);
    bool warned = false;
    for (const auto& w : four.warnings) warned |= w.starts_with("mwu skipped");
    CHECK(warned);
}

TEST_CASE("singleton groups are excluded with a warning") {
    auto table = testgen::make_table(3, 10, 6, false);
    table.rows.push_back({"lonely", "solo", std::nullopt, 0.5});
    AuditConfig cfg;
    cfg.permutations = 99;
    const auto r = run_audit(table, cfg);
    CHECK(r.excluded_groups == std::vector<std::string>{"solo"});
    CHECK(r.groups.size() == 3);
    CHECK(r.descriptives.size() == 4);
    CHECK(r.warnings.front().find("solo") != std::string::npos);
}

TEST_CASE("degenerate groups warn instead of aborting") {
    ObservationTable t;
    for (int i = 0; i < 6; ++i) t.rows.push_back({std::to_string(i), i % 3 == 0 ? "a" : (i % 3 == 1 ? "b" : "c"), std::nullopt, 0.5});
    AuditConfig cfg;
    cfg.permutations = 99;
    const auto r = run_audit(t, cfg);
    CHECK(r.predictions.omnibus[0].p_value == 1.0);
    CHECK(r.predictions.parity.fraction == 1.0);
    CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("errors") {
    AuditConfig bad;
    bad.alpha = 1.5;
    CHECK_THROWS_AS(run_audit(testgen::make_table(3, 5, 1, false), bad), ConfigError);
    bad = AuditConfig{};
    bad.permutations = 10;
    CHECK_THROWS_AS(run_audit(testgen::make_table(3, 5, 1, false), bad), ConfigError);

    CHECK_THROWS_AS(run_audit(testgen::make_table(1, 5, 1, false), AuditConfig{}), DataError);

    auto partial = testgen::make_table(3, 5, 1, true);
    partial.rows[4].label.reset();
    CHECK_THROWS_AS(run_audit(partial, AuditConfig{}), DataError);
}

TEST_CASE("byte-identical reports for a fixed seed") {
    AuditConfig cfg;
    cfg.permutations = 499;
    const auto table = testgen::make_table(5, 50, 9, true, {0, 0.03, 0, 0.05, 0.01});
    const std::string first = io::serialize_report(run_audit(table, cfg));
    cfg.workers = 4;
    const std::string second = io::serialize_report(run_audit(table, cfg));
    // The worker count is not part of the report.
    CHECK(first == second);
}

TEST_CASE("verdicts are invariant to strictly increasing prediction transforms") {
    AuditConfig cfg;
    cfg.permutations = 299;
    const auto table = testgen::make_table(4, 40, 12, false, {0, 0.04, 0.08, 0.02});
    auto monotone = table;
    auto affine = table;
    for (auto& row : monotone.rows) row.prediction = std::exp(4.0 * row.prediction);
    for (auto& row : affine.rows) row.prediction = 2.5 * row.prediction + 0.75;
    const auto base = run_audit(table, cfg);
    const auto mono = run_audit(monotone, cfg);
    const auto aff = run_audit(affine, cfg);

    CHECK(base.predictions.omnibus[0].statistic == mono.predictions.omnibus[0].statistic);
    CHECK(base.predictions.pairwise->z == mono.predictions.pairwise->z);
    CHECK(base.predictions.pairwise->p_adjusted == mono.predictions.pairwise->p_adjusted);
    for (std::size_t i = 0; i < base.predictions.parity.pair_verdicts.size(); ++i) {
        CHECK(base.predictions.parity.pair_verdicts[i].satisfied ==
              mono.predictions.parity.pair_verdicts[i].satisfied);
    }
    CHECK(base.predictions.omnibus[1].p_value == aff.predictions.omnibus[1].p_value);
}

TEST_CASE("null calibration of the omnibus tests") {
    AuditConfig cfg;
    cfg.permutations = 199;
    cfg.workers = 4;
    int all_above = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        cfg.seed = 1000 + trial;
        const auto r = run_audit(testgen::make_table(4, 500, 5000 + trial, false), cfg);
        bool ok = true;
        for (const auto& t : r.predictions.omnibus) ok &= t.p_value > 0.05;
        all_above += ok;
    }
    MESSAGE("trials with every omnibus p > 0.05: " << all_above << " / 100");
    CHECK(all_above >= 90);
}

}  // TEST_SUITE
