#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace ribmorph {

enum class TestMethod { Exact, NormalApprox };

struct TestResult {
    double statistic = 0.0;
    /// Two-sided.
    double p_value = 1.0;
    TestMethod method = TestMethod::Exact;
    std::size_t n = 0;
    std::size_t m = 0;
};

/// Largest number of nonzero differences for the exact signed-rank null.
inline constexpr std::size_t kSignedRankExactMax = 25;
/// Largest n*m for the exact rank-sum null.
inline constexpr std::size_t kRankSumExactMax = 400;

/// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> midranks(const std::vector<double>& values);

/**
 * Paired Wilcoxon signed-rank test. Zero differences are dropped and ties
 * get mid-ranks. The statistic is min(W+, W-). Throws InvalidArgument when
 * every difference is zero.
 */
TestResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs);
TestResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs, TestMethod method);

/**
 * Wilcoxon rank-sum (Mann-Whitney U). The statistic is min(U_a, U_b).
 * The exact null is the permutation distribution of the mid-ranks, so it
 * stays valid with ties.
 */
TestResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b);
TestResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b, TestMethod method);

}  // namespace ribmorph
