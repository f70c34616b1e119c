#include "ribmorph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ribmorph/error.hpp"

namespace ribmorph {

namespace {

// Ranks doubled so mid-ranks stay integral.
std::vector<long> doubled_ranks(const std::vector<double>& ranks)
{
    std::vector<long> out;
    out.reserve(ranks.size());
    for (double r : ranks) {
        out.push_back(std::lround(2.0 * r));
    }
    return out;
}

double tie_term(const std::vector<double>& values)
{
    std::map<double, double> counts;
    for (double v : values) {
        counts[v] += 1.0;
    }
    double sum = 0.0;
    for (const auto& [v, t] : counts) {
        sum += t * t * t - t;
    }
    return sum;
}

double two_sided_normal(double deviation, double variance)
{
    if (variance <= 0.0) {
        return 1.0;
    }
    const double z = std::max(0.0, (std::abs(deviation) - 0.5) / std::sqrt(variance));
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

// Two-sided p from a null count table over doubled statistic values.
double two_sided_exact(const std::vector<double>& counts, long observed)
{
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
        if (static_cast<long>(s) <= observed) {
            lower += counts[s];
        }
        if (static_cast<long>(s) >= observed) {
            upper += counts[s];
        }
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

}  // namespace

std::vector<double> midranks(const std::vector<double>& values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

TestResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs)
{
    std::size_t nonzero = 0;
    for (const auto& [x, y] : pairs) {
        nonzero += (x - y != 0.0) ? 1 : 0;
    }
    return wilcoxon_signed_rank(pairs, nonzero <= kSignedRankExactMax ? TestMethod::Exact : TestMethod::NormalApprox);
}

TestResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs, TestMethod method)
{
    std::vector<double> diffs;
    for (const auto& [x, y] : pairs) {
        if (x - y != 0.0) {
            diffs.push_back(x - y);
        }
    }
    if (diffs.empty()) {
        throw Error(ErrorCode::InvalidArgument, "signed-rank test needs a nonzero difference");
    }
    std::vector<double> magnitudes;
    for (double d : diffs) {
        magnitudes.push_back(std::abs(d));
    }
    const std::vector<double> ranks = midranks(magnitudes);
    const auto n = static_cast<double>(diffs.size());
    double w_plus = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i] > 0.0) {
            w_plus += ranks[i];
        }
    }
    const double total = n * (n + 1.0) / 2.0;
    const double w_minus = total - w_plus;

    TestResult r;
    r.statistic = std::min(w_plus, w_minus);
    r.method = method;
    r.n = diffs.size();
    if (method == TestMethod::Exact) {
        const std::vector<long> twice = doubled_ranks(ranks);
        const long max_sum = std::accumulate(twice.begin(), twice.end(), 0L);
        std::vector<double> counts(static_cast<std::size_t>(max_sum) + 1, 0.0);
        counts[0] = 1.0;
        long reach = 0;
        for (long v : twice) {
            for (long s = reach; s >= 0; --s) {
                counts[static_cast<std::size_t>(s + v)] += counts[static_cast<std::size_t>(s)];
            }
            reach += v;
        }
        r.p_value = two_sided_exact(counts, std::lround(2.0 * w_plus));
    } else {
        const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(magnitudes) / 48.0;
        r.p_value = two_sided_normal(w_plus - total / 2.0, variance);
    }
    return r;
}

TestResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b)
{
    return wilcoxon_rank_sum(a, b, a.size() * b.size() <= kRankSumExactMax ? TestMethod::Exact : TestMethod::NormalApprox);
}

TestResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b, TestMethod method)
{
    if (a.empty() || b.empty()) {
        throw Error(ErrorCode::InvalidArgument, "rank-sum test needs two non-empty samples");
    }
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = midranks(pooled);
    const auto n = static_cast<double>(a.size());
    const auto m = static_cast<double>(b.size());
    const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(a.size()), 0.0);
    const double u_a = rank_sum_a - n * (n + 1.0) / 2.0;

    TestResult r;
    r.statistic = std::min(u_a, n * m - u_a);
    r.method = method;
    r.n = a.size();
    r.m = b.size();
    if (method == TestMethod::Exact) {
        // counts[k][s]: subsets of size k with doubled rank sum s.
        const std::vector<long> twice = doubled_ranks(ranks);
        const long max_sum = std::accumulate(twice.begin(), twice.end(), 0L);
        const std::size_t k_max = a.size();
        std::vector<std::vector<double>> counts(k_max + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        counts[0][0] = 1.0;
        long reach = 0;
        for (long v : twice) {
            for (std::size_t k = k_max; k >= 1; --k) {
                for (long s = reach; s >= 0; --s) {
                    counts[k][static_cast<std::size_t>(s + v)] += counts[k - 1][static_cast<std::size_t>(s)];
                }
            }
            reach += v;
        }
        r.p_value = two_sided_exact(counts[k_max], std::lround(2.0 * rank_sum_a));
    } else {
        const double big_n = n + m;
        const double variance = n * m / 12.0 * ((big_n + 1.0) - tie_term(pooled) / (big_n * (big_n - 1.0)));
        r.p_value = two_sided_normal(u_a - n * m / 2.0, variance);
    }
    return r;
}

}  // namespace ribmorph
