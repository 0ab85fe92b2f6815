#include "holo/analytics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "holo/error.hpp"

namespace holo::analytics {

__extension__ typedef __int128 i128;

namespace {

void check_sample(std::span<const double> xs, const char* name) {
    if (xs.empty()) throw Error("InvalidArgument", std::string(name) + " is empty");
    for (double x : xs) {
        if (!std::isfinite(x)) throw Error("InvalidArgument", std::string(name) + " has a non-finite value");
    }
}

} // namespace

std::string_view to_string(Method method) {
    switch (method) {
    case Method::mann_whitney: return "mann_whitney";
    case Method::t_test: return "t_test";
    case Method::kappa: return "kappa";
    }
    return "unknown";
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double median(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    return n % 2 == 1 ? s[n / 2] : (s[n / 2 - 1] + s[n / 2]) / 2.0;
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// Mann-Whitney

std::vector<std::uint64_t> mann_whitney_null_counts(std::size_t n1, std::size_t n2) {
    if (n1 + n2 > 60) throw Error("InvalidArgument", "exact distribution limited to n1 + n2 <= 60");
    // table[m][n] = counts for sizes (m, n); the largest observation either
    // belongs to a (adding n to U) or to b.
    std::vector<std::vector<std::vector<std::uint64_t>>> table(n1 + 1, std::vector<std::vector<std::uint64_t>>(n2 + 1));
    for (std::size_t m = 0; m <= n1; ++m) {
        for (std::size_t n = 0; n <= n2; ++n) {
            auto& cur = table[m][n];
            cur.assign(m * n + 1, 0);
            if (m == 0 || n == 0) {
                cur[0] = 1;
                continue;
            }
            const auto& with_a = table[m - 1][n];
            const auto& with_b = table[m][n - 1];
            for (std::size_t u = 0; u < with_a.size(); ++u) cur[u + n] += with_a[u];
            for (std::size_t u = 0; u < with_b.size(); ++u) cur[u] += with_b[u];
        }
    }
    return table[n1][n2];
}

double mann_whitney_normal_p(double u, std::size_t n1, std::size_t n2, double tie_term) {
    const double dn1 = static_cast<double>(n1);
    const double dn2 = static_cast<double>(n2);
    const double n = dn1 + dn2;
    const double mu = dn1 * dn2 / 2.0;
    const double var = dn1 * dn2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) return 1.0;
    const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
    return std::min(1.0, 2.0 * normal_sf(z));
}

StatResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    check_sample(a, "group a");
    check_sample(b, "group b");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();

    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n1 + n2);
    for (double x : a) pooled.emplace_back(x, 0);
    for (double x : b) pooled.emplace_back(x, 1);
    std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    bool ties = false;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        const double t = static_cast<double>(j - i);
        if (j - i > 1) {
            ties = true;
            tie_term += t * t * t - t;
        }
        for (std::size_t k = i; k < j; ++k) {
            if (pooled[k].second == 0) rank_sum_a += midrank;
        }
        i = j;
    }

    StatResult r;
    r.method = Method::mann_whitney;
    r.n1 = n1;
    r.n2 = n2;
    r.median_a = median(a);
    r.median_b = median(b);
    r.mean_a = mean(a);
    r.mean_b = mean(b);
    const double dn1 = static_cast<double>(n1);
    const double nn = dn1 * static_cast<double>(n2);
    r.statistic = rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;

    if (pooled.front().first == pooled.back().first) {
        r.degenerate = true;
        r.p_value = 1.0;
        r.effect_size = 0.0;
        return r;
    }
    r.effect_size = 1.0 - 2.0 * r.statistic / nn;

    if (!ties && n1 + n2 <= kExactMaxTotal) {
        const auto counts = mann_whitney_null_counts(n1, n2);
        const auto u = static_cast<std::size_t>(std::llround(r.statistic));
        std::uint64_t total = 0;
        std::uint64_t le = 0;
        std::uint64_t ge = 0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            total += counts[k];
            if (k <= u) le += counts[k];
            if (k >= u) ge += counts[k];
        }
        r.exact = true;
        r.p_value = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total));
        return r;
    }
    r.p_value = mann_whitney_normal_p(r.statistic, n1, n2, tie_term);
    return r;
}

// ---------------------------------------------------------------------------
// t-test

StatResult t_test(std::span<const double> a, std::span<const double> b, TTestVariant variant) {
    check_sample(a, "group a");
    check_sample(b, "group b");
    if (a.size() < 2 || b.size() < 2) throw Error("InvalidArgument", "t-test needs at least two values per group");

    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double m1 = mean(a);
    const double m2 = mean(b);
    const double v1 = variance(a);
    const double v2 = variance(b);
    if (v1 == 0.0 && v2 == 0.0) throw Error("ZeroVariance", "both groups have zero variance");

    const double pooled_var = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
    double se = 0.0;
    double df = 0.0;
    if (variant == TTestVariant::pooled) {
        se = std::sqrt(pooled_var * (1.0 / n1 + 1.0 / n2));
        df = n1 + n2 - 2.0;
    } else {
        const double q1 = v1 / n1;
        const double q2 = v2 / n2;
        se = std::sqrt(q1 + q2);
        df = (q1 + q2) * (q1 + q2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
    }

    StatResult r;
    r.method = Method::t_test;
    r.n1 = a.size();
    r.n2 = b.size();
    r.mean_a = m1;
    r.mean_b = m2;
    r.median_a = median(a);
    r.median_b = median(b);
    r.statistic = (m1 - m2) / se;
    r.df = df;
    const boost::math::students_t dist(df);
    r.p_value = std::min(1.0, 2.0 * boost::math::cdf(dist, -std::abs(r.statistic)));
    r.effect_size = (m1 - m2) / std::sqrt(pooled_var);
    return r;
}

// ---------------------------------------------------------------------------
// Kappa

StatResult cohen_kappa(const std::vector<std::vector<std::int64_t>>& confusion) {
    const std::size_t k = confusion.size();
    if (k == 0) throw Error("InvalidArgument", "confusion matrix is empty");
    std::vector<i128> rows(k, 0);
    std::vector<i128> cols(k, 0);
    i128 total = 0;
    i128 diag = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (confusion[i].size() != k) throw Error("InvalidArgument", "confusion matrix must be square");
        for (std::size_t j = 0; j < k; ++j) {
            const std::int64_t c = confusion[i][j];
            if (c < 0) throw Error("InvalidArgument", "negative count");
            rows[i] += c;
            cols[j] += c;
            total += c;
            if (i == j) diag += c;
        }
    }
    if (total == 0) throw Error("InvalidArgument", "confusion matrix has no observations");

    i128 chance = 0;  // sum of row_i * col_i
    for (std::size_t i = 0; i < k; ++i) chance += rows[i] * cols[i];

    StatResult r;
    r.method = Method::kappa;
    r.n1 = r.n2 = static_cast<std::size_t>(total);
    const i128 den = total * total - chance;
    if (den == 0) {
        r.degenerate = true;
        r.statistic = r.effect_size = 1.0;
        r.p_value = 1.0;
        return r;
    }
    const i128 num = total * diag - chance;
    const double kappa = static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
    r.statistic = r.effect_size = kappa;

    const long double n = static_cast<long double>(total);
    const long double pe = static_cast<long double>(chance) / (n * n);
    long double spread = 0.0L;
    for (std::size_t i = 0; i < k; ++i) {
        const long double pr = static_cast<long double>(rows[i]) / n;
        const long double pc = static_cast<long double>(cols[i]) / n;
        spread += pr * pc * (pr + pc);
    }
    const long double var0 = (pe + pe * pe - spread) / (n * (1.0L - pe) * (1.0L - pe));
    if (var0 > 0.0L) {
        const double z = kappa / static_cast<double>(std::sqrt(var0));
        r.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
    } else {
        r.p_value = 1.0;
    }
    return r;
}

} // namespace holo::analytics
