#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ribmorph/error.hpp"
#include "ribmorph/features.hpp"

using namespace ribmorph;

namespace {

Mat3 rotation_about_z(double angle)
{
    Mat3 r;
    r << std::cos(angle), -std::sin(angle), 0, std::sin(angle), std::cos(angle), 0, 0, 0, 1;
    return r;
}

VertebraInstance vertebra_at(const Vec3& corpus, const Mat3& frame)
{
    VertebraInstance v;
    v.label = 19;
    v.corpus_centroid = corpus;
    v.frame.rotation = frame;
    return v;
}

PathPolyline path_of(std::vector<Vec3> points)
{
    PathPolyline p;
    p.points = std::move(points);
    p.length_mm = PathPolyline::polyline_length(p.points);
    return p;
}

}  // namespace

TEST_CASE("drc and pdrc in the vertebra frame")
{
    const VertebraInstance v = vertebra_at(Vec3(1, 2, 3), Mat3::Identity());
    const PathPolyline p = path_of({Vec3(31, -12, 0), Vec3(38, -14, -2), Vec3(44, -10, -5)});
    const RibFeatureRecord r = make_feature_record("s1", 119, Side::Right, p, v, 1200.0);
    CHECK(r.drc.isApprox(Vec3(30, -14, -3)));
    CHECK(r.pdrc == r.drc.y());
    CHECK(r.ppr.size() == 2);
    for (const Vec3& u : r.ppr) {
        CHECK(u.norm() == doctest::Approx(1.0));
    }
    CHECK(r.ppr[0].isApprox(Vec3(7, -2, -2).normalized()));
    CHECK(r.volume_length_ratio == doctest::Approx(1200.0 / p.length_mm));
    CHECK(r.path_points == 3);

    const RibFeatureRecord left = make_feature_record("s1", 19, Side::Left, path_of({Vec3(-29, -12, 0), Vec3(-36, -14, -2)}), v, 10.0);
    CHECK(left.drc.isApprox(Vec3(30, -14, -3)));
    CHECK(left.ppr[0].isApprox(Vec3(7, -2, -2).normalized()));
}

TEST_CASE("features are invariant to rigid motion of the whole scene")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 10.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 6; ++i) {
        pts.push_back(Vec3(n(rng), n(rng), n(rng)));
    }
    const Vec3 corpus(n(rng), n(rng), n(rng));
    const VertebraInstance v = vertebra_at(corpus, Mat3::Identity());
    const RibFeatureRecord base = make_feature_record("s", 120, Side::Right, path_of(pts), v, 500.0);
    for (double angle : {0.3, 1.2, std::numbers::pi / 2}) {
        const Mat3 rot = rotation_about_z(angle);
        const Vec3 shift(5, -7, 11);
        std::vector<Vec3> moved;
        for (const Vec3& p : pts) {
            moved.push_back(rot * p + shift);
        }
        const RibFeatureRecord r =
            make_feature_record("s", 120, Side::Right, path_of(moved), vertebra_at(rot * corpus + shift, rot), 500.0);
        CHECK(r.drc.isApprox(base.drc, 1e-9));
        CHECK(r.length_mm == doctest::Approx(base.length_mm));
        for (std::size_t i = 0; i < r.ppr.size(); ++i) {
            CHECK(r.ppr[i].isApprox(base.ppr[i], 1e-9));
        }
    }
}

TEST_CASE("n-PPR edges")
{
    const PathPolyline p = path_of({Vec3(0, 0, 0), Vec3(7.5, 0, 0), Vec3(7.5, 7.5, 0)});
    CHECK(compute_nppr(p, 3, Mat3::Identity(), Side::Right).size() == 2);
    CHECK_THROWS_AS(compute_nppr(p, 4, Mat3::Identity(), Side::Right), Error);
    CHECK_THROWS_AS(compute_nppr(p, 1, Mat3::Identity(), Side::Right), Error);
    CHECK_THROWS_AS(volume_length_ratio(10.0, 0.0), Error);
    const RibFeatureRecord single =
        make_feature_record("s", 19, Side::Left, path_of({Vec3(1, 1, 1)}), vertebra_at(Vec3::Zero(), Mat3::Identity()), 4.0);
    CHECK(single.ppr.empty());
    CHECK(single.is_stump);
    CHECK(single.volume_length_ratio == 0.0);
}

TEST_CASE("feature sets")
{
    const auto sets = table5_feature_sets();
    REQUIRE(sets.size() == 7);
    CHECK(sets[0].name() == "2-PPR");
    CHECK(sets[3].name() == "DRC");
    CHECK(sets[6].name() == "4-PPR and DRC");
    for (const FeatureSet& s : sets) {
        CHECK(parse_feature_set(s.name()) == s);
        CHECK(s.column_names().size() == s.column_count());
    }
    CHECK(parse_feature_set("6-PPR").ppr_points == 6);
    CHECK_THROWS_AS(parse_feature_set("1-PPR"), Error);
    CHECK_THROWS_AS(parse_feature_set("banana"), Error);
    CHECK(FeatureSet{4, true}.column_names().front() == "ppr1_r");
    CHECK(FeatureSet{4, true}.column_names().back() == "drc_s");
}

TEST_CASE("feature matrix and csv round trip")
{
    const VertebraInstance v = vertebra_at(Vec3::Zero(), Mat3::Identity());
    std::vector<RibFeatureRecord> records;
    records.push_back(make_feature_record("b", 120, Side::Right,
                                          path_of({Vec3(30, -10, 0), Vec3(51, -4, -3), Vec3(69, 8, -6), Vec3(84, 26, -9)}), v, 900.0));
    records.push_back(make_feature_record("a", 19, Side::Left, path_of({Vec3(-30, -10, 0), Vec3(-36, -7, -2)}), v, 100.0 / 3.0));
    records.push_back(make_feature_record("a", 119, Side::Right, path_of({Vec3(30, -12, 1), Vec3(36, -9, -1), Vec3(41, -3, -3)}), v, 700.0));

    const FeatureMatrix m = build_feature_matrix(records, FeatureSet{0, true});
    CHECK(m.subject_ids == std::vector<std::string>{"a", "a", "b"});
    CHECK(m.rib_labels == std::vector<Label>{19, 119, 120});
    CHECK(m.values(0, 0) == doctest::Approx(30.0));
    CHECK(m.is_stump == std::vector<bool>{true, true, false});
    CHECK_THROWS_AS(build_feature_matrix(records, FeatureSet{3, true}), Error);
    CHECK_FALSE(has_enough_path(records[1], FeatureSet{3, false}));
    CHECK(has_enough_path(records[2], FeatureSet{3, false}));

    std::stringstream buf;
    write_feature_csv(buf, records);
    const std::string text = buf.str();
    CHECK(text.starts_with("schema_version,subject_id,rib_label,side,n_path_points,ppr1_r"));
    const auto back = read_feature_csv(buf);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].subject_id == records[i].subject_id);
        CHECK(back[i].rib_label == records[i].rib_label);
        CHECK(back[i].side == records[i].side);
        CHECK(back[i].ppr == records[i].ppr);
        CHECK(back[i].drc == records[i].drc);
        CHECK(back[i].volume_length_ratio == records[i].volume_length_ratio);
        CHECK(back[i].length_mm == records[i].length_mm);
        CHECK(back[i].is_stump == records[i].is_stump);
    }

    std::istringstream bad("schema_version,subject_id\n1,a\n");
    CHECK_THROWS_AS(read_feature_csv(bad), Error);
    std::string wrong = text;
    wrong.replace(wrong.find("\n1,") + 1, 1, "9");
    std::istringstream versioned(wrong);
    CHECK_THROWS_AS(read_feature_csv(versioned), Error);
}
