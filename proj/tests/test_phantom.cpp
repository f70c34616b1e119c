#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ribmorph/error.hpp"
#include "ribmorph/phantom.hpp"
#include "ribmorph/rlma.hpp"

using namespace ribmorph;

namespace {

LabelVolume grid_for(const CurveSpec& c, double spacing)
{
    Vec3 lo = Vec3::Constant(1e9);
    Vec3 hi = Vec3::Constant(-1e9);
    for (const Vec3& p : c.sample(1.0)) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return GridSpec::covering(lo, hi, spacing, c.tube_radius + 2.0 * spacing).blank();
}

}  // namespace

TEST_CASE("analytic lengths")
{
    CHECK(analytic_length(CurveSpec::line(Vec3::Zero(), Vec3(30, 40, 0), 4)) == doctest::Approx(50.0));
    const CurveSpec quarter = CurveSpec::arc(Vec3::Zero(), 120, Vec3::UnitX(), Vec3::UnitY(), std::numbers::pi / 2, 5);
    CHECK(analytic_length(quarter) == doctest::Approx(188.496).epsilon(1e-5));
    const CurveSpec helix = CurveSpec::helix(Vec3::Zero(), 50, 20, 1, Vec3::UnitX(), Vec3::UnitY(), 4);
    CHECK(analytic_length(helix) == doctest::Approx(314.796).epsilon(1e-5));
    // Sampled polyline converges to the closed form.
    CHECK(PathPolyline::polyline_length(helix.sample(0.1)) == doctest::Approx(analytic_length(helix)).epsilon(1e-4));
    CHECK((helix.point(1.0) - helix.point(0.0)).norm() == doctest::Approx(20.0));
}

TEST_CASE("tube voxel counts")
{
    const CurveSpec line = CurveSpec::line(Vec3::Zero(), Vec3(100, 0, 0), 4);
    const BinaryMask tube = voxelize_tube(line, grid_for(line, 0.5));
    const double expected = std::numbers::pi * 16.0 * 100.0 / 0.125;
    CHECK(std::abs(static_cast<double>(tube.count()) - expected) / expected < 0.03);

    const CurveSpec point = CurveSpec::line(Vec3::Zero(), Vec3::Zero(), 4);
    const BinaryMask ball = voxelize_tube(point, grid_for(point, 0.5));
    const double ball_expected = 4.0 / 3.0 * std::numbers::pi * 64.0 / 0.125;
    CHECK(std::abs(static_cast<double>(ball.count()) - ball_expected) / ball_expected < 0.03);
    for (std::size_t n = 0; n < ball.volume().size(); ++n) {
        if (ball[n]) {
            CHECK(ball.volume().voxel_to_world(ball.volume().coord(n)).norm() <= 4.0 + 1e-9);
        }
    }
}

TEST_CASE("voxelized volume converges as spacing shrinks")
{
    for (double r : {4.0, 5.0}) {
        const CurveSpec arc = CurveSpec::arc(Vec3::Zero(), 60, Vec3::UnitX(), Vec3::UnitY(), 0.6, r);
        const double exact = std::numbers::pi * r * r * analytic_length(arc);
        double previous = 1e9;
        for (double h : {1.0, 0.5, 0.25}) {
            const BinaryMask m = voxelize_tube(arc, grid_for(arc, h));
            const double error = std::abs(static_cast<double>(m.count()) * h * h * h - exact) / exact;
            CHECK(error < previous);
            previous = error;
        }
        CHECK(previous < 0.01);
    }
}

TEST_CASE("tube errors")
{
    const LabelVolume grid = GridSpec{{20, 20, 20}, 1.0, Vec3::Zero()}.blank();
    CHECK_THROWS_AS(voxelize_tube(CurveSpec::line(Vec3(100, 0, 0), Vec3(140, 0, 0), 4), grid), Error);
    CHECK_THROWS_AS(voxelize_tube(CurveSpec::line(Vec3(10, 10, 10), Vec3(12, 10, 10), 1.5), grid), Error);
    const CurveSpec outside = CurveSpec::arc(Vec3(500, 500, 500), 50, Vec3::UnitX(), Vec3::UnitY(), 1.0, 4);
    CHECK_THROWS_AS(voxelize_tube(outside, grid), Error);
}

TEST_CASE("scene construction and truth")
{
    SceneSpec spec;
    spec.stump_lengths = {30.0};
    const PhantomScene scene = build_scene(spec);
    CHECK(scene.rib_truth.size() == 4);
    CHECK(scene.vertebra_truth.size() == 2);
    std::size_t stumps = 0;
    for (const RibTruth& r : scene.rib_truth) {
        CHECK(r.length_mm == analytic_length(r.curve));
        CHECK((r.curve.point(0.0) - r.start_point).norm() < 1e-9);
        stumps += r.is_stump ? 1 : 0;
        const Label painted = scene.ribs.sample_nearest(r.curve.point(0.5));
        CHECK(painted == r.label);
    }
    CHECK(stumps == 1);
    const auto j = scene.truth_json();
    CHECK(j.at("ribs").size() == 4);
    CHECK(j.at("schema_version") == 1);

    SceneSpec crowded;
    crowded.vertebra_pitch_mm = 12.0;
    CHECK_THROWS_AS(build_scene(crowded), Error);
}

TEST_CASE("world transforms are rigid")
{
    const PhantomScene scene = build_scene(SceneSpec{});
    for (const Mat4& t : {rotation_z90(), rotation_x90(), mirror_x()}) {
        CHECK(std::abs(std::abs(t.topLeftCorner<3, 3>().determinant()) - 1.0) < 1e-12);
        const LabelVolume moved = transform_world(scene.ribs, t);
        CHECK(is_ras_dominant(moved.affine()));
        for (const RibTruth& r : scene.rib_truth) {
            const Vec3 p = (t * r.curve.point(0.5).homogeneous()).head<3>();
            CHECK(moved.sample_nearest(p) == r.label);
        }
    }
}
