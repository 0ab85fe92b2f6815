#pragma once

// Reference computations written independently of the library, used to check
// it. Deliberately naive: brute force and textbook formulas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// U for sample a: pairs (x in a, y in b) with x > y, ties counting one half.
inline double u_pairs(const std::vector<double>& a, const std::vector<double>& b) {
    double u = 0.0;
    for (double x : a) {
        for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    }
    return u;
}

// Exact two-sided p for tie-free samples by listing every way to choose which
// n1 of the pooled ranks belong to a.
inline double mw_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n1 = a.size();
    const std::size_t n = a.size() + b.size();
    const double u_obs = u_pairs(a, b);
    std::vector<int> pick(n, 0);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(n1), 1);
    std::sort(pick.begin(), pick.end());
    std::uint64_t total = 0, le = 0, ge = 0;
    do {
        // Ranks 1..n; U_a = sum of a's ranks - n1(n1+1)/2.
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pick[i]) rank_sum += static_cast<double>(i + 1);
        }
        const double u = rank_sum - static_cast<double>(n1 * (n1 + 1)) / 2.0;
        ++total;
        if (u <= u_obs) ++le;
        if (u >= u_obs) ++ge;
    } while (std::next_permutation(pick.begin(), pick.end()));
    const double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
    return std::min(1.0, p);
}

inline double kappa(const std::vector<std::vector<std::int64_t>>& m) {
    const std::size_t k = m.size();
    long double n = 0, diag = 0;
    std::vector<long double> row(k, 0), col(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            n += m[i][j];
            row[i] += m[i][j];
            col[j] += m[i][j];
            if (i == j) diag += m[i][j];
        }
    }
    const long double po = diag / n;
    long double pe = 0;
    for (std::size_t i = 0; i < k; ++i) pe += (row[i] / n) * (col[i] / n);
    return static_cast<double>((po - pe) / (1 - pe));
}

// Crossings per sample for a sine of frequency f sampled at fs.
inline double sine_zcr(double f, double fs) { return 2.0 * f / fs; }

// Interior angle at the middle joint from the three side lengths.
inline double law_of_cosines(double a, double b, double c) {
    return std::acos(std::clamp((a * a + b * b - c * c) / (2.0 * a * b), -1.0, 1.0));
}

struct P3 {
    double x, y, z;
};

// Projectile under constant gravity g (downward along y).
inline P3 parabola(P3 p0, P3 v0, double g, double t) {
    return {p0.x + v0.x * t, p0.y + v0.y * t - 0.5 * g * t * t, p0.z + v0.z * t};
}

// Welch and pooled t, computed from first principles.
inline double t_pooled(const std::vector<double>& a, const std::vector<double>& b) {
    auto m = [](const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); };
    auto ss = [&](const std::vector<double>& x) {
        double mu = m(x), s = 0;
        for (double v : x) s += (v - mu) * (v - mu);
        return s;
    };
    const double n1 = a.size(), n2 = b.size();
    const double sp2 = (ss(a) + ss(b)) / (n1 + n2 - 2);
    return (m(a) - m(b)) / std::sqrt(sp2 * (1 / n1 + 1 / n2));
}

} // namespace oracle
