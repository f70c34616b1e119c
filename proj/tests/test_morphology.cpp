#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "ribmorph/error.hpp"
#include "test_support.hpp"

using namespace ribmorph;
using testsupport::make_volume;

namespace {

// Component sizes by a depth-first flood fill, sorted descending.
std::vector<std::size_t> oracle_component_sizes(const BinaryMask& m, int connectivity)
{
    const Dims d = m.dims();
    std::vector<char> seen(m.volume().size(), 0);
    std::vector<std::size_t> sizes;
    for (std::size_t s = 0; s < seen.size(); ++s) {
        if (!m[s] || seen[s]) {
            continue;
        }
        std::size_t size = 0;
        std::vector<std::size_t> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            ++size;
            const VoxelCoord c = m.volume().coord(cur);
            for (int dk = -1; dk <= 1; ++dk) {
                for (int dj = -1; dj <= 1; ++dj) {
                    for (int di = -1; di <= 1; ++di) {
                        const int manhattan = std::abs(di) + std::abs(dj) + std::abs(dk);
                        if (manhattan == 0 || (connectivity == 6 && manhattan > 1)) {
                            continue;
                        }
                        const VoxelCoord q{c.i + di, c.j + dj, c.k + dk};
                        if (q.i < 0 || q.j < 0 || q.k < 0 || q.i >= d[0] || q.j >= d[1] || q.k >= d[2]) {
                            continue;
                        }
                        const std::size_t n = m.volume().linear_index(q);
                        if (m[n] && !seen[n]) {
                            seen[n] = 1;
                            stack.push_back(n);
                        }
                    }
                }
            }
        }
        sizes.push_back(size);
    }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

BinaryMask box_mask(Dims dims, VoxelCoord lo, VoxelCoord hi)
{
    return BinaryMask(make_volume(dims, [&](int i, int j, int k) {
        return (i >= lo.i && i <= hi.i && j >= lo.j && j <= hi.j && k >= lo.k && k <= hi.k) ? 1u : 0u;
    }));
}

}  // namespace

TEST_CASE("resample to half spacing maps voxels to 2x2x2 blocks")
{
    std::mt19937_64 rng(1);
    const LabelVolume vol = make_volume({4, 4, 4}, [&](int, int, int) { return static_cast<Label>(rng() % 5); });
    const LabelVolume fine = resample_nearest(vol, 0.5);
    CHECK(fine.dims() == Dims{8, 8, 8});
    CHECK(fine.spacing().isApprox(Vec3::Constant(0.5)));
    for (std::size_t n = 0; n < fine.size(); ++n) {
        const VoxelCoord c = fine.coord(n);
        CHECK(fine[n] == vol.at({c.i / 2, c.j / 2, c.k / 2}));
        CHECK((fine.voxel_to_world(c) - vol.voxel_to_world({c.i / 2, c.j / 2, c.k / 2})).cwiseAbs().maxCoeff() == doctest::Approx(0.25));
    }
    CHECK(resample_nearest(vol, 1.0) == vol);
}

TEST_CASE("resampling a sphere keeps its world volume within 5%")
{
    const BinaryMask sphere(make_volume({24, 24, 24}, [](int i, int j, int k) {
        const double x = i - 11.5, y = j - 11.5, z = k - 11.5;
        return x * x + y * y + z * z <= 100.0 ? 1u : 0u;
    }));
    const BinaryMask fine = BinaryMask::nonzero(resample_nearest(sphere.volume(), 0.5));
    const double before = static_cast<double>(sphere.count());
    const double after = static_cast<double>(fine.count()) * 0.125;
    CHECK(std::abs(after - before) / before < 0.05);
    std::set<Label> labels(fine.volume().data().begin(), fine.volume().data().end());
    CHECK(labels == std::set<Label>{0, 1});
}

TEST_CASE("fill_holes fills enclosed cavities only")
{
    const BinaryMask cube = box_mask({9, 9, 9}, {2, 2, 2}, {6, 6, 6});
    std::vector<Label> shell(cube.volume().data().begin(), cube.volume().data().end());
    for (int k = 3; k <= 5; ++k) {
        for (int j = 3; j <= 5; ++j) {
            for (int i = 3; i <= 5; ++i) {
                shell[cube.volume().linear_index({i, j, k})] = 0;
            }
        }
    }
    const BinaryMask hollow(cube.volume().with_data(shell));
    const BinaryMask filled = fill_holes(hollow);
    CHECK(filled.count() == hollow.count() + 27);
    CHECK(fill_holes(filled).volume() == filled.volume());
    CHECK(fill_holes(cube).volume() == cube.volume());

    shell[cube.volume().linear_index({4, 4, 2})] = 0;
    shell[cube.volume().linear_index({4, 4, 1})] = 0;
    const BinaryMask tunnel(cube.volume().with_data(shell));
    CHECK(fill_holes(tunnel).count() == tunnel.count());
}

TEST_CASE("connected components")
{
    SUBCASE("two separated cubes")
    {
        const LabelVolume a = box_mask({10, 5, 5}, {0, 0, 0}, {2, 2, 2}).volume();
        const LabelVolume b = box_mask({10, 5, 5}, {5, 1, 1}, {7, 3, 3}).volume();
        std::vector<Label> data(a.size());
        for (std::size_t n = 0; n < data.size(); ++n) {
            data[n] = a[n] | b[n];
        }
        const ComponentSet cs = connected_components(BinaryMask(a.with_data(data)), Connectivity::TwentySix);
        CHECK(cs.count == 2);
        CHECK(cs.voxel_counts == std::vector<std::size_t>{27, 27});
        CHECK(cs.boxes[0] == BoundingBox{{0, 0, 0}, {2, 2, 2}});
    }
    SUBCASE("corner contact")
    {
        const BinaryMask m(make_volume({2, 2, 2}, [](int i, int j, int k) { return (i == j && j == k) ? 1u : 0u; }));
        CHECK(connected_components(m, Connectivity::TwentySix).count == 1);
        CHECK(connected_components(m, Connectivity::Six).count == 2);
    }
    SUBCASE("random masks agree with a flood-fill oracle")
    {
        std::mt19937_64 rng(42);
        for (int trial = 0; trial < 10; ++trial) {
            const BinaryMask m = testsupport::random_mask(rng, {16, 16, 16}, 0.2 + 0.02 * trial);
            for (auto [conn, n] : {std::pair{Connectivity::Six, 6}, std::pair{Connectivity::TwentySix, 26}}) {
                const ComponentSet cs = connected_components(m, conn);
                const auto sizes = oracle_component_sizes(m, n);
                CHECK(static_cast<std::size_t>(cs.count) == sizes.size());
                CHECK(cs.voxel_counts == sizes);
                for (std::size_t v = 0; v < m.volume().size(); ++v) {
                    CHECK((cs.labels[v] != 0) == m[v]);
                }
            }
        }
    }
    SUBCASE("axis permutation maps components onto each other")
    {
        std::mt19937_64 rng(9);
        const BinaryMask m = testsupport::random_mask(rng, {7, 9, 11}, 0.3);
        const LabelVolume permuted = permute_axes(m.volume(), {2, 0, 1}, {false, true, false});
        const ComponentSet a = connected_components(m, Connectivity::TwentySix);
        const ComponentSet b = connected_components(BinaryMask(permuted), Connectivity::TwentySix);
        CHECK(a.voxel_counts == b.voxel_counts);
        // Voxels sharing a component before share one after.
        std::map<Label, Label> mapping;
        for (std::size_t n = 0; n < m.volume().size(); ++n) {
            if (a.labels[n] == 0) {
                continue;
            }
            const Label other = b.labels.sample_nearest(m.volume().voxel_to_world(m.volume().coord(n)));
            auto [it, inserted] = mapping.emplace(a.labels[n], other);
            CHECK(it->second == other);
        }
    }
}

TEST_CASE("centroid and surfaces")
{
    const BinaryMask single(make_volume({1, 1, 1}, [](int, int, int) { return 1u; }, 1.0, Vec3(3, 4, 5)));
    CHECK(centroid(single).isApprox(Vec3(3, 4, 5)));
    CHECK(surface_voxels(single).size() == 1);

    const BinaryMask ell(make_volume({2, 2, 1}, [](int i, int j, int) { return (i == 0 || j == 0) ? 1u : 0u; }));
    CHECK(centroid(ell).isApprox(Vec3(1.0 / 3, 1.0 / 3, 0)));

    const BinaryMask sym(make_volume({3, 3, 3}, [](int, int, int) { return 1u; }, 1.0, Vec3(-1, -1, -1)));
    CHECK(centroid(sym).norm() < 1e-12);
    CHECK(surface_voxels(sym).size() == 26);
    CHECK(surface_voxels(box_mask({7, 7, 7}, {1, 1, 1}, {5, 5, 5})).size() == 98);

    const BinaryMask empty(LabelVolume::zeros({2, 2, 2}, Mat4::Identity()));
    CHECK_THROWS_AS(centroid(empty), Error);
}

TEST_CASE("crop with margin")
{
    const LabelVolume one = make_volume({11, 11, 11}, [](int i, int j, int k) { return (i == 5 && j == 5 && k == 5) ? 3u : 0u; });
    const LabelVolume tight = crop_with_margin(one, {3}, 0.0);
    CHECK(tight.dims() == Dims{1, 1, 1});
    const LabelVolume wide = crop_with_margin(one, {3}, 2.0);
    CHECK(wide.dims() == Dims{5, 5, 5});
    CHECK(wide.at({2, 2, 2}) == 3);
    CHECK(wide.voxel_to_world({2, 2, 2}).isApprox(one.voxel_to_world({5, 5, 5})));
    CHECK(crop_with_margin(one, {3}, 100.0).dims() == Dims{11, 11, 11});
    CHECK_THROWS_AS(crop_with_margin(one, {4}, 1.0), Error);
}
