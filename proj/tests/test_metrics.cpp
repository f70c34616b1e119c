#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ribmorph/error.hpp"
#include "ribmorph/metrics.hpp"
#include "test_support.hpp"

using namespace ribmorph;
using testsupport::make_volume;

namespace {

std::vector<Vec3> boundary(const BinaryMask& m)
{
    const Dims& d = m.volume().dims();
    const auto on = [&](int i, int j, int k) {
        return i >= 0 && j >= 0 && k >= 0 && i < d[0] && j < d[1] && k < d[2] && m[m.volume().linear_index({i, j, k})];
    };
    std::vector<Vec3> out;
    for (int k = 0; k < d[2]; ++k) {
        for (int j = 0; j < d[1]; ++j) {
            for (int i = 0; i < d[0]; ++i) {
                if (on(i, j, k) && !(on(i - 1, j, k) && on(i + 1, j, k) && on(i, j - 1, k) && on(i, j + 1, k) &&
                                     on(i, j, k - 1) && on(i, j, k + 1))) {
                    out.push_back(m.volume().index_to_world(Vec3(i, j, k)));
                }
            }
        }
    }
    return out;
}

double brute_assd(const BinaryMask& a, const BinaryMask& b)
{
    const auto sa = boundary(a);
    const auto sb = boundary(b);
    const auto one_way = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
        double sum = 0.0;
        for (const Vec3& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& q : to) {
                best = std::min(best, (p - q).norm());
            }
            sum += best;
        }
        return sum;
    };
    return (one_way(sa, sb) + one_way(sb, sa)) / static_cast<double>(sa.size() + sb.size());
}

double brute_dice(const BinaryMask& a, const BinaryMask& b)
{
    std::size_t both = 0;
    std::size_t total = 0;
    for (std::size_t n = 0; n < a.volume().size(); ++n) {
        both += (a[n] && b[n]) ? 1 : 0;
        total += (a[n] ? 1 : 0) + (b[n] ? 1 : 0);
    }
    return total == 0 ? 1.0 : 2.0 * static_cast<double>(both) / static_cast<double>(total);
}

BinaryMask with_spacing(const BinaryMask& m, const Vec3& spacing)
{
    return BinaryMask(LabelVolume(m.volume().dims(), LabelVolume::make_affine(spacing, Vec3(3, -2, 1)),
                                  std::vector<Label>(m.volume().data().begin(), m.volume().data().end())));
}

}  // namespace

TEST_CASE("dice and assd agree with brute force")
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> side(2, 12);
    std::uniform_real_distribution<double> density(0.05, 0.6);
    for (int trial = 0; trial < 120; ++trial) {
        const Dims dims{side(rng), side(rng), side(rng)};
        BinaryMask a = testsupport::random_mask(rng, dims, density(rng));
        BinaryMask b = testsupport::random_mask(rng, dims, density(rng));
        if (trial % 3 == 0) {
            a = with_spacing(a, Vec3(0.7, 1.3, 2.1));
            b = with_spacing(b, Vec3(0.7, 1.3, 2.1));
        }
        CHECK(dice(a, b) == doctest::Approx(brute_dice(a, b)).epsilon(1e-12));
        CHECK(dice(a, a) == 1.0);
        if (a.count() > 0 && b.count() > 0) {
            CHECK(std::abs(assd(a, b) - brute_assd(a, b)) <= 1e-9);
            CHECK(assd(a, a) == 0.0);
            CHECK(assd(a, b) == doctest::Approx(assd(b, a)));
        }
    }
}

TEST_CASE("metric edge cases")
{
    const auto at = [](int ti, int tj, int tk) {
        return BinaryMask(make_volume({10, 3, 3}, [=](int i, int j, int k) { return (i == ti && j == tj && k == tk) ? 1u : 0u; }));
    };
    CHECK(assd(at(2, 1, 1), at(5, 1, 1)) == doctest::Approx(3.0));
    CHECK(dice(at(2, 1, 1), at(5, 1, 1)) == 0.0);
    const BinaryMask empty(make_volume({10, 3, 3}, [](int, int, int) { return 0u; }));
    CHECK(dice(empty, empty) == 1.0);
    CHECK_THROWS_AS(assd(empty, at(1, 1, 1)), Error);
    const BinaryMask other(make_volume({9, 3, 3}, [](int, int, int) { return 0u; }));
    CHECK_THROWS_AS(dice(empty, other), Error);
}

TEST_CASE("instance matching")
{
    // Reference rib split in two halves by the prediction.
    const LabelVolume ref = make_volume({20, 4, 4}, [](int i, int, int) { return i < 16 ? 1u : 0u; });
    const LabelVolume split = make_volume({20, 4, 4}, [](int i, int, int) { return i < 8 ? 1u : (i < 16 ? 2u : 0u); });
    const InstanceMatching m = match_instances(split, ref);
    CHECK(m.tp() == 1);
    CHECK(m.fp() == 1);
    CHECK(m.fn() == 0);
    CHECK(m.matches[0].dsc == doctest::Approx(2.0 / 3.0));
    CHECK(m.matches[0].prediction == 1);

    // Overlap below the threshold: DSC 0.4.
    const LabelVolume a = make_volume({20, 1, 1}, [](int i, int, int) { return i < 10 ? 1u : 0u; });
    const LabelVolume b = make_volume({20, 1, 1}, [](int i, int, int) { return (i >= 8 && i < 18) ? 7u : 0u; });
    const InstanceMatching low = match_instances(b, a);
    CHECK(low.tp() == 0);
    CHECK(low.fp() == 1);
    CHECK(low.fn() == 1);
    const auto pairs = pairwise_dice(b, a);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].dsc == doctest::Approx(0.2));

    const LabelVolume c = make_volume({20, 1, 1}, [](int i, int, int) { return (i >= 4 && i < 14) ? 7u : 0u; });
    CHECK(pairwise_dice(c, a)[0].dsc == doctest::Approx(0.6));
    const LabelVolume d = make_volume({20, 1, 1}, [](int i, int, int) { return (i >= 6 && i < 16) ? 7u : 0u; });
    CHECK(pairwise_dice(d, a)[0].dsc == doctest::Approx(0.4));
    CHECK(match_instances(d, a).tp() == 0);

    CHECK(match_instances(ref, ref).tp() == 1);
}

TEST_CASE("greedy matching can miss the optimum")
{
    // r1 = {0,1,2}, r2 = {3}; p1 = {0,1,3}, p2 = {2}.
    const Label r[4] = {1, 1, 1, 2};
    const Label p[4] = {1, 1, 2, 1};
    const LabelVolume ref = make_volume({4, 1, 1}, [&](int i, int, int) { return r[i]; });
    const LabelVolume pred = make_volume({4, 1, 1}, [&](int i, int, int) { return p[i]; });
    const InstanceMatching m = match_instances(pred, ref);
    CHECK(m.tp() == 1);
    CHECK(m.matches[0].dsc == doctest::Approx(2.0 / 3.0));
    // Both cross pairs reach 0.5, so a one-to-one assignment with two matches exists.
    int at_threshold = 0;
    for (const MatchedPair& pair : pairwise_dice(pred, ref)) {
        at_threshold += (pair.dsc >= kMatchThreshold && pair.dsc < 0.6) ? 1 : 0;
    }
    CHECK(at_threshold == 2);
}

TEST_CASE("panoptic quality")
{
    const PanopticScores s = panoptic(1, 1, {0.9, 0.8});
    CHECK(s.rq == doctest::Approx(2.0 / 3.0));
    CHECK(*s.sq == doctest::Approx(0.85));
    CHECK(*s.pq == *s.sq * s.rq);
    CHECK(panoptic(0, 0, {}).rq == 1.0);
    CHECK_FALSE(panoptic(0, 0, {}).sq.has_value());
    CHECK(panoptic(2, 0, {}).rq == 0.0);
    CHECK(std::round(0.984 * 0.987 * 1000.0) / 1000.0 == doctest::Approx(0.971));
    CHECK(std::abs(0.990 * 0.976 - 0.967) <= 0.001);

    const LabelVolume ref = make_volume({20, 10, 4}, [](int i, int j, int) {
        return j < 3 ? (i < 9 ? 1u : 2u) : (j > 5 && i > 2 ? 3u : 0u);
    });
    const LabelVolume pred = make_volume({20, 10, 4}, [](int i, int j, int) {
        return j < 3 ? (i < 10 ? 4u : 5u) : (j > 6 && i > 2 ? 6u : 0u);
    });
    const PanopticReport report = evaluate_segmentation(pred, ref);
    CHECK(report.matching.tp() == 3);
    CHECK(report.pq_dsc == report.sq_dsc * report.rq);
    REQUIRE(report.pq_assd.has_value());
    CHECK(*report.pq_assd == *report.sq_assd * report.rq);
    CHECK(report.binary_dsc == doctest::Approx(dice(BinaryMask::nonzero(pred), BinaryMask::nonzero(ref))));
    const auto j = report_to_json(report);
    CHECK(j.at("tp") == 3);

    const PanopticReport self = evaluate_segmentation(ref, ref);
    CHECK(self.pq_dsc == 1.0);
    CHECK(*self.sq_assd == 0.0);
}
