#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace holo::analytics {

enum class Method { mann_whitney, t_test, kappa };

std::string_view to_string(Method method);

struct StatResult {
    Method method = Method::mann_whitney;
    double statistic = 0.0;  // U for group a, t, or kappa
    double p_value = 1.0;    // two-sided
    double effect_size = 0.0;  // rank-biserial r, Cohen's d, or kappa
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::optional<double> df;
    double median_a = 0.0;
    double median_b = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    bool exact = false;       // p from full enumeration
    bool degenerate = false;  // every value tied (U) / chance agreement of 1 (kappa)
};

double mean(std::span<const double> xs);
double median(std::span<const double> xs);
// Sample variance (n - 1 denominator).
double variance(std::span<const double> xs);

inline constexpr std::size_t kExactMaxTotal = 12;

// U_a = R_a - n1(n1+1)/2 with midranks for ties, r = 1 - 2 U_a / (n1 n2).
// Exact two-sided p, min(1, 2 min(P(U <= u), P(U >= u))), when n1 + n2 <= 12
// and there are no ties; otherwise the normal approximation with tie and
// continuity corrections. When every value is tied the result is flagged
// degenerate with p = 1 and r = 0.
// Throws Error("InvalidArgument") for empty or non-finite samples.
StatResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

// Exact null distribution of U for sample sizes (n1, n2): counts[u] for
// u = 0..n1*n2, summing to C(n1+n2, n1).
std::vector<std::uint64_t> mann_whitney_null_counts(std::size_t n1, std::size_t n2);

// Normal-approximation p for U_a with the given tie correction term
// sum(t^3 - t) over tie groups.
double mann_whitney_normal_p(double u, std::size_t n1, std::size_t n2, double tie_term);

enum class TTestVariant { welch, pooled };

// Throws Error("ZeroVariance") when both groups have zero variance and
// Error("InvalidArgument") for groups smaller than two.
StatResult t_test(std::span<const double> a, std::span<const double> b, TTestVariant variant = TTestVariant::welch);

// Confusion matrix of counts, rows = rater 1, columns = rater 2.
// kappa = (p_o - p_e) / (1 - p_e); when p_e = 1 the result is flagged
// degenerate and kappa = 1. p is two-sided from the null standard error.
// Throws Error("InvalidArgument") for non-square, negative or all-zero input.
StatResult cohen_kappa(const std::vector<std::vector<std::int64_t>>& confusion);

// Standard normal upper tail, P(Z > z).
double normal_sf(double z);

} // namespace holo::analytics
