#include <doctest.h>

#include <random>

#include "gen.hpp"
#include "holo/analytics/stats.hpp"
#include "holo/error.hpp"
#include "oracles.hpp"

using namespace holo::analytics;
using Catch = holo::Error;

namespace {

std::vector<double> distinct_sample(gen::Rng& rng, std::size_t n, std::vector<double>& used) {
    std::vector<double> out;
    std::uniform_int_distribution<int> d(0, 1'000'000);
    while (out.size() < n) {
        const double v = d(rng) / 1000.0;
        if (std::find(used.begin(), used.end(), v) != used.end()) continue;
        used.push_back(v);
        out.push_back(v);
    }
    return out;
}

} // namespace

TEST_CASE("Mann-Whitney worked examples") {
    const std::vector<double> a{1, 2}, b{3, 4};
    StatResult r = mann_whitney_u(a, b);
    CHECK(r.statistic == 0.0);
    CHECK(r.exact);
    CHECK(r.p_value == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
    CHECK(r.effect_size == 1.0);

    const std::vector<double> c{1, 2, 3}, d{4, 5, 6};
    r = mann_whitney_u(c, d);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(0.1).epsilon(1e-12));

    const std::vector<double> e{3, 1, 4, 1, 5};
    r = mann_whitney_u(e, e);
    CHECK(r.statistic == 12.5);
    CHECK(r.effect_size == 0.0);
}

TEST_CASE("Mann-Whitney effect size for a reported U") {
    // U = 56.5 with 18 per group gives r = 1 - 2 * 56.5 / 324.
    std::vector<double> a(18), b(18);
    for (int i = 0; i < 18; ++i) {
        a[i] = i;
        b[i] = i + 0.5;
    }
    const StatResult r = mann_whitney_u(a, b);
    CHECK(r.effect_size == doctest::Approx(1.0 - 2.0 * r.statistic / 324.0).epsilon(1e-15));
    CHECK(1.0 - 2.0 * 56.5 / 324.0 == doctest::Approx(0.651).epsilon(1e-3));
}

TEST_CASE("Mann-Whitney matches brute force on random samples") {
    gen::Rng rng(11);
    std::uniform_int_distribution<std::size_t> size(1, 6);
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<double> used;
        const auto a = distinct_sample(rng, size(rng), used);
        const auto b = distinct_sample(rng, size(rng), used);
        const StatResult r = mann_whitney_u(a, b);
        CHECK(r.statistic == oracle::u_pairs(a, b));
        CHECK(r.exact);
        CHECK(r.p_value == doctest::Approx(oracle::mw_exact_p(a, b)).epsilon(1e-12));
        const StatResult rb = mann_whitney_u(b, a);
        CHECK(r.statistic + rb.statistic == static_cast<double>(a.size() * b.size()));
        CHECK(r.effect_size >= -1.0);
        CHECK(r.effect_size <= 1.0);
        const bool separated = *std::max_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end()) ||
                               *std::min_element(a.begin(), a.end()) > *std::max_element(b.begin(), b.end());
        CHECK((std::abs(r.effect_size) == 1.0) == separated);
    }
}

TEST_CASE("U counts with ties use midranks") {
    gen::Rng rng(12);
    std::uniform_int_distribution<int> small(0, 4);
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<double> a(1 + iter % 9), b(1 + iter % 7);
        for (auto& v : a) v = small(rng);
        for (auto& v : b) v = small(rng);
        const StatResult r = mann_whitney_u(a, b);
        CHECK(r.statistic == oracle::u_pairs(a, b));
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
    }
}

TEST_CASE("exact and normal p agree closely for tie-free small samples") {
    double worst = 0.0, worst_small = 0.0;
    for (std::size_t n1 = 1; n1 <= 11; ++n1) {
        for (std::size_t n2 = 1; n1 + n2 <= 12; ++n2) {
            const auto counts = mann_whitney_null_counts(n1, n2);
            double total = 0.0;
            for (auto c : counts) total += static_cast<double>(c);
            double le = 0.0;
            for (std::size_t u = 0; u < counts.size(); ++u) {
                le += static_cast<double>(counts[u]);
                double ge = total - le + static_cast<double>(counts[u]);
                const double exact = std::min(1.0, 2.0 * std::min(le, ge) / total);
                const double approx = mann_whitney_normal_p(static_cast<double>(u), n1, n2, 0.0);
                const double gap = std::abs(exact - approx);
                if (std::min(n1, n2) >= 2 && n1 + n2 >= 6) {
                    worst = std::max(worst, gap);
                } else {
                    worst_small = std::max(worst_small, gap);
                }
            }
        }
    }
    CHECK(worst <= 0.05);
    // Singleton groups and (2, 2) are too coarse for the normal curve.
    CHECK(worst_small > 0.05);
    CHECK(worst_small < 0.14);
}

TEST_CASE("null distribution counts add up to the binomial coefficient") {
    for (std::size_t n1 = 1; n1 <= 8; ++n1) {
        for (std::size_t n2 = 1; n2 <= 8; ++n2) {
            const auto counts = mann_whitney_null_counts(n1, n2);
            REQUIRE(counts.size() == n1 * n2 + 1);
            std::uint64_t total = 0;
            for (auto c : counts) total += c;
            std::uint64_t binom = 1;
            for (std::size_t k = 1; k <= n1; ++k) binom = binom * (n2 + k) / k;
            CHECK(total == binom);
            for (std::size_t u = 0; u < counts.size(); ++u) CHECK(counts[u] == counts[counts.size() - 1 - u]);
        }
    }
}

TEST_CASE("Mann-Whitney edge cases") {
    const std::vector<double> empty, one{1.0}, nan{std::nan("")};
    CHECK_THROWS_AS(mann_whitney_u(empty, one), Catch);
    CHECK_THROWS_AS(mann_whitney_u(nan, one), Catch);
    const std::vector<double> same{2, 2, 2};
    const StatResult r = mann_whitney_u(same, same);
    CHECK(r.degenerate);
    CHECK(r.p_value == 1.0);
    CHECK(r.effect_size == 0.0);
}

TEST_CASE("t-test worked examples") {
    const std::vector<double> a{0, 0, 1, 1}, b{1, 1, 2, 2};
    const StatResult r = t_test(a, b, TTestVariant::pooled);
    // Sample variances are 1/3 each, so s_p^2 = 1/3 and SE = sqrt(1/6).
    CHECK(r.statistic == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-12));
    CHECK(r.statistic == doctest::Approx(oracle::t_pooled(a, b)).epsilon(1e-12));
    CHECK(*r.df == 6.0);
    CHECK(r.p_value == doctest::Approx(0.0498).epsilon(1e-3));

    const StatResult same = t_test(a, a);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == doctest::Approx(1.0));
    const std::vector<double> flat{3, 3, 3};
    try {
        t_test(flat, flat);
        FAIL("zero variance accepted");
    } catch (const Catch& e) {
        CHECK(e.kind() == "ZeroVariance");
    }
    const std::vector<double> tiny{1};
    CHECK_THROWS_AS(t_test(tiny, a), Catch);
}

TEST_CASE("t-test matches the textbook formula and is translation invariant") {
    gen::Rng rng(13);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<double> a(2 + iter % 10), b(2 + iter % 7);
        for (auto& v : a) v = nd(rng);
        for (auto& v : b) v = nd(rng) + 0.3;
        const StatResult pooled = t_test(a, b, TTestVariant::pooled);
        CHECK(pooled.statistic == doctest::Approx(oracle::t_pooled(a, b)).epsilon(1e-9));
        CHECK(*pooled.df == static_cast<double>(a.size() + b.size() - 2));
        const StatResult welch = t_test(a, b);
        std::vector<double> a2 = a, b2 = b;
        for (auto& v : a2) v += 17.0;
        for (auto& v : b2) v += 17.0;
        const StatResult shifted = t_test(a2, b2);
        CHECK(shifted.statistic == doctest::Approx(welch.statistic).epsilon(1e-6));
        CHECK(welch.p_value >= 0.0);
        CHECK(welch.p_value <= 1.0);
        CHECK(*welch.df <= static_cast<double>(a.size() + b.size() - 2) + 1e-9);
        CHECK(*welch.df >= static_cast<double>(std::min(a.size(), b.size()) - 1) - 1e-9);
    }
}

TEST_CASE("kappa worked examples") {
    StatResult r = cohen_kappa({{20, 5}, {10, 15}});
    CHECK(r.statistic == doctest::Approx(0.4).epsilon(1e-12));
    r = cohen_kappa({{7, 0, 0}, {0, 3, 0}, {0, 0, 9}});
    CHECK(r.statistic == 1.0);
    r = cohen_kappa({{5, 0}, {0, 0}});
    CHECK(r.degenerate);
    CHECK(r.statistic == 1.0);
    // Independent raters: the matrix is an outer product of the marginals.
    r = cohen_kappa({{6, 9, 15}, {4, 6, 10}, {10, 15, 25}});
    CHECK(std::abs(r.statistic) <= 1e-12);
    CHECK_THROWS_AS(cohen_kappa({{1, 2}}), Catch);
    CHECK_THROWS_AS(cohen_kappa({{0, 0}, {0, 0}}), Catch);
    CHECK_THROWS_AS(cohen_kappa({{1, -2}, {0, 3}}), Catch);
}

TEST_CASE("kappa matches the oracle on random matrices") {
    gen::Rng rng(14);
    std::uniform_int_distribution<int> k(2, 6), count(0, 40);
    for (int iter = 0; iter < 500; ++iter) {
        const int size = k(rng);
        std::vector<std::vector<std::int64_t>> m(size, std::vector<std::int64_t>(size));
        for (auto& row : m) {
            for (auto& v : row) v = count(rng);
        }
        m[0][1] += 1;  // keeps p_e below 1
        const StatResult r = cohen_kappa(m);
        CHECK(std::abs(r.statistic - oracle::kappa(m)) <= 1e-12);
        CHECK(r.statistic <= 1.0);
    }
}

TEST_CASE("summary statistics") {
    const std::vector<double> xs{4, 1, 3, 2};
    CHECK(mean(xs) == 2.5);
    CHECK(median(xs) == 2.5);
    CHECK(variance(xs) == doctest::Approx(5.0 / 3.0));
    CHECK(normal_sf(0.0) == doctest::Approx(0.5));
    CHECK(normal_sf(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-9));
}
