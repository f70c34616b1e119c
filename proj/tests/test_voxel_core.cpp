#include <doctest.h>

#include <random>

#include "ribmorph/error.hpp"
#include "ribmorph/nifti.hpp"
#include "test_support.hpp"

using namespace ribmorph;
using testsupport::make_volume;
using testsupport::RawNifti;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidArgument;
}

const std::array<std::array<float, 4>, 3> kIdentityRows{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}}};

}  // namespace

TEST_CASE("handcrafted uint8 header parses to the constructed volume")
{
    RawNifti raw({4, 4, 4}, 2, 8);
    raw.sform(kIdentityRows);
    std::vector<std::uint8_t> values(64, 0);
    values[1 + 4 * (1 + 4 * 1)] = 7;
    raw.data(values);

    const LabelVolume vol = parse_nifti(raw.bytes);
    CHECK(vol.dims() == Dims{4, 4, 4});
    CHECK(vol.affine().isApprox(Mat4::Identity()));
    std::size_t labelled = 0;
    for (std::size_t n = 0; n < vol.size(); ++n) {
        labelled += vol[n] != 0 ? 1 : 0;
    }
    CHECK(labelled == 1);
    CHECK(vol.at({1, 1, 1}) == 7);
}

TEST_CASE("datatypes int16, int32, uint16 and integral float32 decode")
{
    auto check = [](std::int16_t datatype, std::int16_t bitpix, auto sample) {
        using T = decltype(sample);
        RawNifti raw({2, 1, 1}, datatype, bitpix);
        raw.sform(kIdentityRows);
        raw.data(std::vector<T>{T(0), sample});
        const LabelVolume vol = parse_nifti(raw.bytes);
        CHECK(vol[1] == static_cast<Label>(sample));
    };
    check(4, 16, std::int16_t{300});
    check(8, 32, std::int32_t{123456});
    check(512, 16, std::uint16_t{65000});
    check(16, 32, 42.0f);
}

TEST_CASE("scl_slope and scl_inter apply before label conversion")
{
    RawNifti raw({2, 1, 1}, 2, 8);
    raw.sform(kIdentityRows);
    raw.put<float>(112, 2.0f);
    raw.put<float>(116, 1.0f);
    raw.data(std::vector<std::uint8_t>{0, 3});
    const LabelVolume vol = parse_nifti(raw.bytes);
    CHECK(vol[0] == 1);
    CHECK(vol[1] == 7);
}

TEST_CASE("header errors are reported distinctly")
{
    SUBCASE("detached-header magic")
    {
        RawNifti raw({1, 1, 1}, 2, 8);
        std::memcpy(raw.bytes.data() + 344, "ni1\0", 4);
        raw.data(std::vector<std::uint8_t>{0});
        CHECK(code_of([&] { parse_nifti(raw.bytes); }) == ErrorCode::MalformedHeader);
    }
    SUBCASE("wrong sizeof_hdr")
    {
        RawNifti raw({1, 1, 1}, 2, 8);
        raw.put<std::int32_t>(0, 540);
        raw.data(std::vector<std::uint8_t>{0});
        CHECK(code_of([&] { parse_nifti(raw.bytes); }) == ErrorCode::MalformedHeader);
    }
    SUBCASE("unsupported datatype")
    {
        RawNifti raw({1, 1, 1}, 64, 64);
        raw.data(std::vector<double>{0.0});
        CHECK(code_of([&] { parse_nifti(raw.bytes); }) == ErrorCode::UnsupportedDatatype);
    }
    SUBCASE("non-integral float")
    {
        RawNifti raw({1, 1, 1}, 16, 32);
        raw.data(std::vector<float>{1.5f});
        CHECK(code_of([&] { parse_nifti(raw.bytes); }) == ErrorCode::NonIntegralLabel);
    }
    SUBCASE("negative label")
    {
        RawNifti raw({1, 1, 1}, 4, 16);
        raw.data(std::vector<std::int16_t>{-2});
        CHECK(code_of([&] { parse_nifti(raw.bytes); }) == ErrorCode::NegativeLabel);
    }
    SUBCASE("two-dimensional image")
    {
        RawNifti raw({2, 2, 1}, 2, 8);
        raw.put<std::int16_t>(40, 2);
        raw.data(std::vector<std::uint8_t>(4, 0));
        CHECK(code_of([&] { parse_nifti(raw.bytes); }) == ErrorCode::BadDimensionality);
    }
    SUBCASE("truncated data")
    {
        RawNifti raw({4, 4, 4}, 2, 8);
        raw.data(std::vector<std::uint8_t>(10, 0));
        CHECK(code_of([&] { parse_nifti(raw.bytes); }) == ErrorCode::TruncatedData);
    }
}

TEST_CASE("big-endian headers parse like little-endian ones")
{
    RawNifti le({2, 1, 1}, 4, 16);
    le.sform({{{2, 0, 0, 5}, {0, 3, 0, 6}, {0, 0, 4, 7}}});
    le.data(std::vector<std::int16_t>{1, 258});
    // Swap every multi-byte field this test writes.
    std::vector<std::uint8_t> be = le.bytes;
    auto swap = [&](std::size_t off, std::size_t size) { std::reverse(be.begin() + static_cast<long>(off), be.begin() + static_cast<long>(off + size)); };
    swap(0, 4);
    for (std::size_t a = 0; a < 8; ++a) {
        swap(40 + 2 * a, 2);
    }
    swap(70, 2);
    swap(72, 2);
    for (std::size_t a = 0; a < 8; ++a) {
        swap(76 + 4 * a, 4);
    }
    swap(108, 4);
    swap(254, 2);
    for (std::size_t n = 0; n < 12; ++n) {
        swap(280 + 4 * n, 4);
    }
    swap(352, 2);
    swap(354, 2);
    const LabelVolume a = parse_nifti(le.bytes);
    const LabelVolume b = parse_nifti(be);
    CHECK(a == b);
    CHECK(b[1] == 258);
    CHECK(b.spacing().isApprox(Vec3(2, 3, 4)));
}

TEST_CASE("qform quaternion is used when sform is absent")
{
    RawNifti raw({2, 2, 2}, 2, 8);
    raw.put<std::int16_t>(252, 1);
    // 180 degrees about z: b = c = 0, d = 1.
    raw.put<float>(264, 1.0f);
    raw.put<float>(268, 10.0f);
    raw.data(std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6, 7, 8});
    const LabelVolume vol = parse_nifti(raw.bytes);
    CHECK(is_ras_dominant(vol.affine()));
    // Input voxel (0,0,0) sits at world (10, 0, 0) and must still carry label 1 there.
    CHECK(vol.sample_nearest(Vec3(10, 0, 0)) == 1);
    CHECK(vol.sample_nearest(Vec3(9, -1, 1)) == 8);
}

TEST_CASE("writer layout and round trip")
{
    const LabelVolume one = LabelVolume::zeros({1, 1, 1}, Mat4::Identity());
    CHECK(write_nifti(one).size() == 354);

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> label(0, 400);
    const LabelVolume vol = make_volume({5, 4, 3}, [&](int, int, int) { return static_cast<Label>(label(rng)); }, 0.75,
                                        Vec3(-3.5, 12.25, 100.0));
    for (bool gz : {false, true}) {
        const auto bytes = write_nifti(vol, gz);
        CHECK(is_gzip(bytes) == gz);
        const LabelVolume back = parse_nifti(bytes);
        CHECK(back == vol);
        CHECK(parse_nifti(write_nifti(back, gz)) == back);
    }
    const LabelVolume big = make_volume({1, 1, 1}, [](int, int, int) { return 70000u; });
    CHECK(code_of([&] { write_nifti(big); }) == ErrorCode::LabelOverflow);
}

TEST_CASE("voxel and world transforms")
{
    const LabelVolume id = LabelVolume::zeros({3, 3, 3}, Mat4::Identity());
    CHECK(id.voxel_to_world({0, 0, 0}).isZero());
    CHECK(id.world_to_voxel(Vec3::Zero()) == VoxelCoord{0, 0, 0});

    const LabelVolume half = LabelVolume::zeros({4, 4, 4}, LabelVolume::make_affine(Vec3::Constant(0.5), Vec3(10, 0, 0)));
    CHECK(half.voxel_to_world({2, 0, 0}).isApprox(Vec3(11, 0, 0)));
    CHECK(half.world_to_voxel(Vec3(11, 0, 0)) == VoxelCoord{2, 0, 0});
    CHECK(code_of([&] { half.voxel_to_world({4, 0, 0}); }) == ErrorCode::OutOfBounds);
    CHECK(code_of([&] { half.world_to_voxel(Vec3(-1, 0, 0)); }) == ErrorCode::OutOfBounds);

    Mat4 oblique = Mat4::Identity();
    oblique.topLeftCorner<3, 3>() << 0, -0.8, 0, 0.9, 0, 0, 0, 0, 1.2;
    oblique.col(3).head<3>() = Vec3(4, -2, 7);
    const LabelVolume vol = LabelVolume::zeros({7, 6, 5}, oblique);
    std::mt19937_64 rng(11);
    for (int n = 0; n < 100; ++n) {
        const VoxelCoord v{std::uniform_int_distribution<int>(0, 6)(rng), std::uniform_int_distribution<int>(0, 5)(rng),
                           std::uniform_int_distribution<int>(0, 4)(rng)};
        CHECK(vol.world_to_voxel(vol.voxel_to_world(v)) == v);
    }
}

TEST_CASE("reorientation keeps labels at their world positions")
{
    Mat4 affine = Mat4::Identity();
    affine.topLeftCorner<3, 3>() << 0, 0, -1.5, -1, 0, 0, 0, 2, 0;
    affine.col(3).head<3>() = Vec3(20, 5, -3);
    std::mt19937_64 rng(5);
    std::vector<Label> data(4 * 5 * 6);
    for (auto& v : data) {
        v = static_cast<Label>(rng() % 9);
    }
    const LabelVolume raw({4, 5, 6}, affine, data);
    CHECK_FALSE(is_ras_dominant(raw.affine()));
    const LabelVolume ras = reorient_to_ras(raw);
    CHECK(is_ras_dominant(ras.affine()));
    std::vector<Label> a(raw.data().begin(), raw.data().end());
    std::vector<Label> b(ras.data().begin(), ras.data().end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    for (std::size_t n = 0; n < raw.size(); ++n) {
        const Vec3 p = raw.voxel_to_world(raw.coord(n));
        const VoxelCoord q = ras.world_to_voxel(p);
        CHECK((ras.voxel_to_world(q) - p).norm() < 1e-6);
        CHECK(ras.at(q) == raw[n]);
    }

    Mat4 diagonal = Mat4::Identity();
    diagonal.topLeftCorner<3, 3>() << 1, -1, 0, 1, 1, 0, 0, 0, 1;
    CHECK(code_of([&] { reorient_to_ras(LabelVolume::zeros({2, 2, 2}, diagonal)); }) == ErrorCode::NotAxisDominant);
}
