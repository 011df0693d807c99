#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "fairaudit/errors.hpp"
#include "fairaudit/posthoc.hpp"
#include "oracles.hpp"

using namespace fairaudit;
using V = std::vector<double>;

namespace {

PairwiseMatrix matrix_with_adjusted(const std::vector<double>& upper, std::size_t k) {
    PairwiseMatrix m;
    for (std::size_t g = 0; g < k; ++g) m.groups.push_back("g" + std::to_string(g));
    m.z = SquareMatrix(k, 0.0);
    m.p_raw = SquareMatrix(k, 1.0);
    SquareMatrix adj(k, 1.0);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            adj(i, j) = adj(j, i) = upper[pos++];
        }
    }
    m.p_adjusted = adj;
    m.adjustment = Adjustment::benjamini_hochberg;
    return m;
}

std::vector<double> pattern(std::size_t satisfied, std::size_t total) {
    std::vector<double> p(total, 1e-6);
    for (std::size_t i = 0; i < satisfied; ++i) p[i * (total / std::max<std::size_t>(satisfied, 1)) % total] = 0.2;
    return p;
}

}  // namespace

TEST_SUITE("dunn_pairwise") {

TEST_CASE("two identical groups") {
    const std::vector<Sample> g{{1, 2, 3}, {1, 2, 3}};
    const auto m = dunn_pairwise(g, {"a", "b"});
    CHECK(m.z(0, 1) == doctest::Approx(0.0));
    CHECK(m.p_raw(0, 1) == doctest::Approx(1.0));
    CHECK(m.p_raw(1, 0) == doctest::Approx(1.0));
    CHECK_FALSE(m.p_adjusted.has_value());
}

TEST_CASE("three separated pairs") {
    // mean ranks 1.5, 3.5, 5.5; V = 6 * 7 / 12 = 3.5; se = sqrt(3.5 * (1/2 + 1/2))
    const std::vector<Sample> g{{1, 2}, {3, 4}, {5, 6}};
    const auto m = dunn_pairwise(g);
    CHECK(m.groups == std::vector<std::string>{"0", "1", "2"});
    CHECK(m.z(0, 1) == doctest::Approx(-2.0 / std::sqrt(3.5)));
    CHECK(m.z(0, 2) == doctest::Approx(-4.0 / std::sqrt(3.5)));
    CHECK(m.z(0, 2) < m.z(0, 1));
    CHECK(m.z(0, 1) < 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(m.p_raw(i, i) == 1.0);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(m.z(i, j) == -m.z(j, i));
            CHECK(m.p_raw(i, j) == m.p_raw(j, i));
        }
    }
}

TEST_CASE("all values tied") {
    const std::vector<Sample> g{{1, 1}, {1, 1}, {1}};
    const auto m = dunn_pairwise(g);
    CHECK(m.warnings == std::vector<std::string>{"degenerate_variance"});
    CHECK(m.p_raw(0, 2) == 1.0);
}

TEST_CASE("k = 2 reproduces the tie-corrected MWU z up to sign") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> level(0, 6);
    for (int t = 0; t < 200; ++t) {
        V a(2 + rng() % 20);
        V b(2 + rng() % 20);
        for (auto& v : a) v = level(rng);
        for (auto& v : b) v = level(rng);
        const auto mw = mann_whitney_u(a, b);
        if (!mw.warnings.empty()) continue;
        const auto m = dunn_pairwise(std::vector<Sample>{a, b});
        CHECK(std::fabs(std::fabs(m.z(0, 1)) - std::fabs(*mw.z)) <= 1e-9);
    }
}

TEST_CASE("preconditions") {
    CHECK_THROWS_AS(dunn_pairwise(std::vector<Sample>{{1, 2}}), DataError);
    CHECK_THROWS_AS(dunn_pairwise(std::vector<Sample>{{1, 2}, {}}), DataError);
    CHECK_THROWS_AS(dunn_pairwise(std::vector<Sample>{{1, 2}, {3}}, {"only-one"}), DataError);
}

}  // TEST_SUITE

TEST_SUITE("adjustment") {

TEST_CASE("benjamini-hochberg examples") {
    const auto adj = adjust_bh(V{0.01, 0.04, 0.03});
    CHECK(adj[0] == doctest::Approx(0.03));
    CHECK(adj[1] == doctest::Approx(0.04));
    CHECK(adj[2] == doctest::Approx(0.04));
    CHECK(adjust_bh(V{0.37}) == V{0.37});
    CHECK(adjust_bh(V{0.2, 0.2, 0.2, 0.2}) == V{0.2, 0.2, 0.2, 0.2});
    CHECK(adjust_bh(V{0.9, 0.95}) == V{0.95, 0.95});
}

TEST_CASE("bonferroni examples") {
    const auto adj = adjust_bonferroni(V{0.01, 0.04, 0.03});
    CHECK(adj[0] == doctest::Approx(0.03));
    CHECK(adj[1] == doctest::Approx(0.12));
    CHECK(adj[2] == doctest::Approx(0.09));
    CHECK(adjust_bonferroni(V{0.5, 0.9}) == V{1.0, 1.0});
    CHECK(adjust_bonferroni(V{0.25}) == V{0.25});
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(adjust_bh(V{0.1, 1.2}), DomainError);
    CHECK_THROWS_AS(adjust_bh(V{-0.1}), DomainError);
    CHECK_THROWS_AS(adjust_bonferroni(V{NAN}), DomainError);
    CHECK_THROWS_AS(adjust_bh(V{}), DomainError);
    CHECK_THROWS_AS(adjust(V{2.0}, Adjustment::none), DomainError);
}

TEST_CASE("parse_adjustment") {
    CHECK(parse_adjustment("bh") == Adjustment::benjamini_hochberg);
    CHECK(parse_adjustment("bonferroni") == Adjustment::bonferroni);
    CHECK(parse_adjustment("none") == Adjustment::none);
    CHECK_THROWS_AS(parse_adjustment("holm"), ConfigError);
}

TEST_CASE("BH properties over random p-vectors") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        const std::size_t m = 1 + rng() % 25;
        V p(m);
        // Mix of signal and null so rejections actually happen.
        for (auto& v : p) v = (rng() % 3 == 0) ? std::pow(unif(rng), 6.0) : unif(rng);
        const V bh = adjust_bh(p);
        const V bf = adjust_bonferroni(p);
        const auto reject = oracle::bh_step_up(p, 0.05);
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(bh[i] >= p[i]);
            CHECK(bh[i] <= 1.0);
            CHECK(bf[i] >= bh[i]);
            CHECK((bh[i] < 0.05) == reject[i]);
            for (std::size_t j = 0; j < m; ++j) {
                if (p[i] <= p[j]) CHECK(bh[i] <= bh[j]);
            }
        }
        if (m == 1) CHECK(bh[0] == p[0]);
    }
}

TEST_CASE("apply_adjustment treats the upper triangle as one family") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Sample> g(5);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int n = 0; n < 30; ++n) g[i].push_back(unif(rng) + 0.15 * static_cast<double>(i));
    }
    auto m = dunn_pairwise(g);
    apply_adjustment(m, Adjustment::benjamini_hochberg);
    REQUIRE(m.p_adjusted);
    V upper;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) upper.push_back(m.p_raw(i, j));
    }
    CHECK(upper.size() == m.pair_count());
    const V expected = adjust_bh(upper);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK((*m.p_adjusted)(i, i) == 1.0);
        for (std::size_t j = i + 1; j < 5; ++j) {
            CHECK((*m.p_adjusted)(i, j) == expected[pos]);
            CHECK((*m.p_adjusted)(j, i) == expected[pos]);
            CHECK((*m.p_adjusted)(i, j) >= m.p_raw(i, j));
            ++pos;
        }
    }
    CHECK(m.adjustment == Adjustment::benjamini_hochberg);
}

}  // TEST_SUITE

TEST_SUITE("parity_fraction") {

TEST_CASE("fractions as reported") {
    struct Case {
        std::size_t satisfied;
        std::size_t k;
        double rounded;
    };
    for (const Case c : {Case{1, 7, 0.048}, Case{2, 7, 0.095}, Case{2, 6, 0.133}, Case{3, 6, 0.2}}) {
        const std::size_t total = c.k * (c.k - 1) / 2;
        const auto m = matrix_with_adjusted(pattern(c.satisfied, total), c.k);
        const auto s = parity_fraction(m, 0.05);
        CHECK(s.total_pairs == total);
        CHECK(s.satisfied_count == c.satisfied);
        CHECK(s.fraction == static_cast<double>(c.satisfied) / static_cast<double>(total));
        CHECK(rounded_fraction(s) == c.rounded);
    }
}

TEST_CASE("all pairs satisfied") {
    const auto m = matrix_with_adjusted(V(10, 1.0), 5);
    const auto s = parity_fraction(m, 0.05, ParityCriterion::error);
    CHECK(s.fraction == 1.0);
    CHECK(s.criterion == ParityCriterion::error);
}

TEST_CASE("boundary p equal to alpha satisfies parity") {
    const auto m = matrix_with_adjusted(V{0.05}, 2);
    CHECK(parity_fraction(m, 0.05).satisfied_count == 1);
}

TEST_CASE("count matches a direct scan of the matrix") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> unif(0.0, 0.1);
    for (int t = 0; t < 50; ++t) {
        const std::size_t k = 2 + rng() % 7;
        V upper(k * (k - 1) / 2);
        for (auto& v : upper) v = unif(rng);
        const auto m = matrix_with_adjusted(upper, k);
        std::size_t scan = 0;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) scan += (*m.p_adjusted)(i, j) >= 0.05;
        }
        CHECK(parity_fraction(m, 0.05).satisfied_count == scan);
    }
}

TEST_CASE("errors") {
    auto m = matrix_with_adjusted(V{0.5}, 2);
    CHECK_THROWS_AS(parity_fraction(m, 0.0), ConfigError);
    CHECK_THROWS_AS(parity_fraction(m, 1.0), ConfigError);
    m.p_adjusted.reset();
    CHECK_THROWS_AS(parity_fraction(m, 0.05), DataError);
}

}  // TEST_SUITE
