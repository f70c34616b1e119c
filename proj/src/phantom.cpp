#include "ribmorph/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ribmorph/error.hpp"
#include "ribmorph/rlma.hpp"

namespace ribmorph {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 to_vec(const nlohmann::json& j)
{
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

nlohmann::json from_vec(const Vec3& v)
{
    return nlohmann::json::array({v.x(), v.y(), v.z()});
}

nlohmann::json curve_to_json(const CurveSpec& c)
{
    switch (c.kind) {
    case CurveKind::Line:
        return {{"kind", "line"}, {"start", from_vec(c.start)}, {"end", from_vec(c.end)}, {"tube_radius", c.tube_radius}};
    case CurveKind::CircularArc:
        return {{"kind", "circular_arc"}, {"center", from_vec(c.center)}, {"radius", c.radius},
                {"u", from_vec(c.u)},     {"v", from_vec(c.v)},           {"sweep_rad", c.sweep_rad},
                {"tube_radius", c.tube_radius}};
    case CurveKind::Helix:
        return {{"kind", "helix"},    {"center", from_vec(c.center)}, {"radius", c.radius},
                {"u", from_vec(c.u)}, {"v", from_vec(c.v)},           {"turns", c.sweep_rad / kTwoPi},
                {"pitch", c.pitch},   {"tube_radius", c.tube_radius}};
    }
    return {};
}

Vec3 mirrored(Vec3 p)
{
    p.x() = -p.x();
    return p;
}

// Painter that refuses to let structures share or touch voxels.
class ScenePainter {
public:
    explicit ScenePainter(const LabelVolume& grid) : grid_(grid), owner_(grid.size(), 0) {}

    void paint(int structure, std::size_t linear)
    {
        if (owner_[linear] != 0 && owner_[linear] != structure) {
            throw Error(ErrorCode::Overlap, "generated structures overlap");
        }
        owner_[linear] = structure;
    }

    void check_separation() const
    {
        const Dims& d = grid_.dims();
        for (std::size_t n = 0; n < owner_.size(); ++n) {
            if (owner_[n] == 0) {
                continue;
            }
            const VoxelCoord c = grid_.coord(n);
            for (int dk = -1; dk <= 1; ++dk) {
                for (int dj = -1; dj <= 1; ++dj) {
                    for (int di = -1; di <= 1; ++di) {
                        const VoxelCoord q{c.i + di, c.j + dj, c.k + dk};
                        if (q.i < 0 || q.j < 0 || q.k < 0 || q.i >= d[0] || q.j >= d[1] || q.k >= d[2]) {
                            continue;
                        }
                        const int other = owner_[grid_.linear_index(q)];
                        if (other != 0 && other != owner_[n]) {
                            throw Error(ErrorCode::Overlap, "generated structures touch");
                        }
                    }
                }
            }
        }
    }

private:
    const LabelVolume& grid_;
    std::vector<int> owner_;
};

}  // namespace

CurveSpec CurveSpec::line(const Vec3& start, const Vec3& end, double tube_radius)
{
    CurveSpec c;
    c.kind = CurveKind::Line;
    c.start = start;
    c.end = end;
    c.tube_radius = tube_radius;
    return c;
}

CurveSpec CurveSpec::arc(const Vec3& center, double radius, const Vec3& u, const Vec3& v, double sweep_rad,
                         double tube_radius)
{
    if (!(radius > 0.0) || !(sweep_rad >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "arc needs a positive radius and non-negative sweep");
    }
    CurveSpec c;
    c.kind = CurveKind::CircularArc;
    c.center = center;
    c.radius = radius;
    c.u = u.normalized();
    c.v = (v - v.dot(c.u) * c.u).normalized();
    c.sweep_rad = sweep_rad;
    c.tube_radius = tube_radius;
    return c;
}

CurveSpec CurveSpec::arc_from(const Vec3& start, const Vec3& tangent, const Vec3& toward, double radius,
                              double length, double tube_radius)
{
    const Vec3 t = tangent.normalized();
    const Vec3 bend = toward - toward.dot(t) * t;
    if (bend.norm() < 1e-9) {
        throw Error(ErrorCode::InvalidArgument, "bend direction is parallel to the tangent");
    }
    const Vec3 n = bend.normalized();
    return arc(start + radius * n, radius, -n, t, length / radius, tube_radius);
}

CurveSpec CurveSpec::helix(const Vec3& center, double radius, double pitch, double turns, const Vec3& u,
                           const Vec3& v, double tube_radius)
{
    CurveSpec c = arc(center, radius, u, v, kTwoPi * turns, tube_radius);
    c.kind = CurveKind::Helix;
    c.pitch = pitch;
    return c;
}

Vec3 CurveSpec::point(double s) const
{
    if (kind == CurveKind::Line) {
        return start + s * (end - start);
    }
    const double t = s * sweep_rad;
    Vec3 p = center + radius * (std::cos(t) * u + std::sin(t) * v);
    if (kind == CurveKind::Helix) {
        p += pitch * t / kTwoPi * u.cross(v);
    }
    return p;
}

Vec3 CurveSpec::tangent(double s) const
{
    if (kind == CurveKind::Line) {
        const Vec3 d = end - start;
        return d.norm() > 0.0 ? Vec3(d.normalized()) : Vec3::Zero();
    }
    const double t = s * sweep_rad;
    Vec3 d = radius * (-std::sin(t) * u + std::cos(t) * v);
    if (kind == CurveKind::Helix) {
        d += pitch / kTwoPi * u.cross(v);
    }
    return d.normalized();
}

std::vector<Vec3> CurveSpec::sample(double step) const
{
    if (!(step > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sample step must be positive");
    }
    const auto segments = std::max<long>(1, static_cast<long>(std::ceil(analytic_length(*this) / step)));
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(segments) + 1);
    for (long i = 0; i <= segments; ++i) {
        out.push_back(point(static_cast<double>(i) / static_cast<double>(segments)));
    }
    return out;
}

double analytic_length(const CurveSpec& c)
{
    switch (c.kind) {
    case CurveKind::Line: return (c.end - c.start).norm();
    case CurveKind::CircularArc: return c.radius * c.sweep_rad;
    case CurveKind::Helix: {
        const double turns = c.sweep_rad / kTwoPi;
        return turns * std::hypot(kTwoPi * c.radius, c.pitch);
    }
    }
    return 0.0;
}

LabelVolume GridSpec::blank() const
{
    return LabelVolume::zeros(dims, LabelVolume::make_affine(Vec3::Constant(spacing), origin));
}

GridSpec GridSpec::covering(const Vec3& lo, const Vec3& hi, double spacing, double margin_mm)
{
    GridSpec g;
    g.spacing = spacing;
    const Vec3 center = 0.5 * (lo + hi);
    for (int a = 0; a < 3; ++a) {
        const double extent = hi[a] - lo[a] + 2.0 * margin_mm;
        g.dims[static_cast<std::size_t>(a)] = static_cast<int>(std::ceil(extent / spacing)) + 1;
        g.origin[a] = center[a] - 0.5 * (g.dims[static_cast<std::size_t>(a)] - 1) * spacing;
    }
    return g;
}

BinaryMask voxelize_tube(const CurveSpec& curve, const LabelVolume& grid)
{
    const double spacing = grid.spacing().maxCoeff();
    const double r = curve.tube_radius;
    if (r < 2.0 * spacing - 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "tube radius must be at least twice the voxel spacing");
    }
    const std::vector<Vec3> samples = curve.sample(grid.spacing().minCoeff() / 4.0);
    const Mat3 inverse = grid.affine().topLeftCorner<3, 3>().inverse();
    Vec3 reach;
    for (int a = 0; a < 3; ++a) {
        reach[a] = r * inverse.row(a).norm();
    }
    const Dims& d = grid.dims();
    const double r2 = r * r;
    std::vector<double> best(grid.size(), std::numeric_limits<double>::infinity());
    std::vector<long> nearest(grid.size(), -1);

    for (std::size_t n = 0; n < samples.size(); ++n) {
        const Vec3 c = grid.world_to_index(samples[n]);
        std::array<int, 3> lo{};
        std::array<int, 3> hi{};
        for (std::size_t a = 0; a < 3; ++a) {
            lo[a] = static_cast<int>(std::ceil(c[static_cast<int>(a)] - reach[static_cast<int>(a)] - 1e-9));
            hi[a] = static_cast<int>(std::floor(c[static_cast<int>(a)] + reach[static_cast<int>(a)] + 1e-9));
            if (lo[a] < 1 || hi[a] > d[a] - 2) {
                throw Error(ErrorCode::OutOfBounds, "tube does not fit in the grid");
            }
        }
        for (int k = lo[2]; k <= hi[2]; ++k) {
            for (int j = lo[1]; j <= hi[1]; ++j) {
                for (int i = lo[0]; i <= hi[0]; ++i) {
                    const std::size_t lin = grid.linear_index({i, j, k});
                    const double d2 = (grid.index_to_world(Vec3(i, j, k)) - samples[n]).squaredNorm();
                    if (d2 <= r2 && d2 < best[lin]) {
                        best[lin] = d2;
                        nearest[lin] = static_cast<long>(n);
                    }
                }
            }
        }
    }

    const bool has_ends = analytic_length(curve) > 0.0;
    const Vec3 out_start = -curve.tangent(0.0);
    const Vec3 out_end = curve.tangent(1.0);
    const auto last = static_cast<long>(samples.size()) - 1;
    std::vector<Label> data(grid.size(), 0);
    for (std::size_t lin = 0; lin < data.size(); ++lin) {
        const long n = nearest[lin];
        if (n < 0) {
            continue;
        }
        if (has_ends && (n == 0 || n == last)) {
            const Vec3 p = grid.voxel_to_world(grid.coord(lin));
            const Vec3& s = samples[static_cast<std::size_t>(n)];
            const Vec3& out = n == 0 ? out_start : out_end;
            if ((p - s).dot(out) > 1e-9) {
                continue;
            }
        }
        data[lin] = 1;
    }
    return BinaryMask(grid.with_data(std::move(data)));
}

SceneSpec scene_spec_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::SchemaViolation, "scene spec must be a JSON object");
    }
    SceneSpec s;
    try {
        s.n_vertebrae = j.value("n_vertebrae", s.n_vertebrae);
        s.ribs_per_side = j.value("ribs_per_side", s.ribs_per_side);
        s.stump_lengths = j.value("stump_lengths", s.stump_lengths);
        s.spacing_mm = j.value("spacing_mm", s.spacing_mm);
        s.regular_length_mm = j.value("regular_length_mm", s.regular_length_mm);
        s.rib_curvature_radius_mm = j.value("rib_curvature_radius_mm", s.rib_curvature_radius_mm);
        s.tube_radius_mm = j.value("tube_radius_mm", s.tube_radius_mm);
        s.first_vertebra_label = j.value("first_vertebra_label", s.first_vertebra_label);
        s.vertebra_pitch_mm = j.value("vertebra_pitch_mm", s.vertebra_pitch_mm);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("scene spec: ") + e.what());
    }
    return s;
}

nlohmann::json scene_spec_to_json(const SceneSpec& s)
{
    return {{"n_vertebrae", s.n_vertebrae},
            {"ribs_per_side", s.ribs_per_side},
            {"stump_lengths", s.stump_lengths},
            {"spacing_mm", s.spacing_mm},
            {"regular_length_mm", s.regular_length_mm},
            {"rib_curvature_radius_mm", s.rib_curvature_radius_mm},
            {"tube_radius_mm", s.tube_radius_mm},
            {"first_vertebra_label", s.first_vertebra_label},
            {"vertebra_pitch_mm", s.vertebra_pitch_mm}};
}

nlohmann::json PhantomScene::truth_json() const
{
    nlohmann::json vertebrae = nlohmann::json::array();
    for (const auto& v : vertebra_truth) {
        nlohmann::json frame = nlohmann::json::array();
        for (int c = 0; c < 3; ++c) {
            frame.push_back(from_vec(v.frame.col(c)));
        }
        vertebrae.push_back({{"label", v.label}, {"corpus_center", from_vec(v.corpus_center)}, {"frame_columns_ras", frame}});
    }
    nlohmann::json ribs = nlohmann::json::array();
    for (const auto& r : rib_truth) {
        ribs.push_back({{"label", r.label},
                        {"vertebra", r.vertebra},
                        {"side", std::string(to_string(r.side))},
                        {"length_mm", r.length_mm},
                        {"start_point", from_vec(r.start_point)},
                        {"is_stump", r.is_stump},
                        {"curve", curve_to_json(r.curve)}});
    }
    return {{"schema_version", 1}, {"vertebrae", vertebrae}, {"ribs", ribs}};
}

PhantomScene build_scene(const SceneSpec& spec)
{
    if (spec.n_vertebrae < 1 || spec.ribs_per_side < 0 || spec.ribs_per_side > spec.n_vertebrae) {
        throw Error(ErrorCode::InvalidArgument, "need n_vertebrae >= 1 and 0 <= ribs_per_side <= n_vertebrae");
    }
    if (spec.stump_lengths.size() > 2 || (!spec.stump_lengths.empty() && spec.ribs_per_side == 0)) {
        throw Error(ErrorCode::InvalidArgument, "stump lengths apply to the two ribs of the lowest rib-bearing level");
    }
    for (double len : spec.stump_lengths) {
        if (!(len > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "stump lengths must be positive");
        }
    }
    if (spec.first_vertebra_label < 1 || spec.first_vertebra_label + static_cast<Label>(spec.n_vertebrae) - 1 >= kRightRibOffset) {
        throw Error(ErrorCode::InvalidArgument, "vertebra labels must stay within 1..99");
    }
    if (!(spec.spacing_mm > 0.0) || !(spec.regular_length_mm > 0.0) || !(spec.rib_curvature_radius_mm > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "spacing, rib length and curvature radius must be positive");
    }

    const double r = spec.tube_radius_mm;
    const Vec3 tangent = Vec3(0.70, -0.55, -0.25).normalized();
    const Vec3 anterior = Vec3::UnitY();

    PhantomScene scene{LabelVolume::zeros({1, 1, 1}, Mat4::Identity()), LabelVolume::zeros({1, 1, 1}, Mat4::Identity()),
                       LabelVolume::zeros({1, 1, 1}, Mat4::Identity()), {}, {}};
    Vec3 lo(-24.0, -22.0, 11.0);
    Vec3 hi(24.0, 24.0, 11.0);
    for (int i = 0; i < spec.n_vertebrae; ++i) {
        const double z = -spec.vertebra_pitch_mm * i;
        const Label label = spec.first_vertebra_label + static_cast<Label>(i);
        scene.vertebra_truth.push_back({label, Vec3(0.0, 10.0, z), Mat3::Identity()});
        lo.z() = std::min(lo.z(), z - 11.0);
        hi.z() = std::max(hi.z(), z + 11.0);
        if (i >= spec.ribs_per_side) {
            continue;
        }
        for (Side side : {Side::Right, Side::Left}) {
            double length = spec.regular_length_mm;
            const std::size_t slot = side == Side::Right ? 0 : 1;
            if (i == spec.ribs_per_side - 1 && slot < spec.stump_lengths.size()) {
                length = spec.stump_lengths[slot];
            }
            Vec3 start(30.0, -14.0, z);
            Vec3 dir = tangent;
            if (side == Side::Left) {
                start = mirrored(start);
                dir = mirrored(dir);
            }
            RibTruth t;
            t.label = anatomic_rib_label(label, side);
            t.vertebra = label;
            t.side = side;
            t.curve = CurveSpec::arc_from(start, dir, anterior, spec.rib_curvature_radius_mm, length, r);
            t.length_mm = analytic_length(t.curve);
            t.start_point = start;
            t.is_stump = classify_stump(t.length_mm);
            for (const Vec3& p : t.curve.sample(1.0)) {
                lo = lo.cwiseMin(p - Vec3::Constant(r));
                hi = hi.cwiseMax(p + Vec3::Constant(r));
            }
            scene.rib_truth.push_back(t);
        }
    }
    // Symmetric in x so mirrored structures land on mirrored voxel centres.
    const double half_width = std::max(-lo.x(), hi.x());
    lo.x() = -half_width;
    hi.x() = half_width;
    const LabelVolume grid = GridSpec::covering(lo, hi, spec.spacing_mm, 3.0 * spec.spacing_mm + 1.0).blank();

    ScenePainter painter(grid);
    std::vector<Label> vertebra_data(grid.size(), 0);
    std::vector<Label> corpus_data(grid.size(), 0);
    for (std::size_t lin = 0; lin < grid.size(); ++lin) {
        const Vec3 p = grid.voxel_to_world(grid.coord(lin));
        for (std::size_t v = 0; v < scene.vertebra_truth.size(); ++v) {
            const double dz = std::abs(p.z() - scene.vertebra_truth[v].corpus_center.z());
            if (dz > 11.0) {
                continue;
            }
            const bool corpus = p.x() * p.x() + (p.y() - 10.0) * (p.y() - 10.0) <= 14.0 * 14.0;
            const bool arch = std::abs(p.x()) <= 10.0 && p.y() >= -22.0 && p.y() <= -4.0 && dz <= 8.0;
            const bool process = std::abs(p.x()) <= 24.0 && p.y() >= -16.0 && p.y() <= -8.0 && dz <= 4.0;
            if (corpus || arch || process) {
                painter.paint(static_cast<int>(v) + 1, lin);
                vertebra_data[lin] = scene.vertebra_truth[v].label;
                if (corpus) {
                    corpus_data[lin] = scene.vertebra_truth[v].label;
                }
            }
        }
    }
    std::vector<Label> rib_data(grid.size(), 0);
    for (std::size_t n = 0; n < scene.rib_truth.size(); ++n) {
        const BinaryMask tube = voxelize_tube(scene.rib_truth[n].curve, grid);
        for (std::size_t lin = 0; lin < grid.size(); ++lin) {
            if (tube[lin]) {
                painter.paint(1000 + static_cast<int>(n), lin);
                rib_data[lin] = scene.rib_truth[n].label;
            }
        }
    }
    painter.check_separation();

    scene.ribs = grid.with_data(std::move(rib_data));
    scene.vertebrae = grid.with_data(std::move(vertebra_data));
    scene.corpora = grid.with_data(std::move(corpus_data));
    return scene;
}

Mat4 rotation_z90()
{
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    return m;
}

Mat4 rotation_x90()
{
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() << 1, 0, 0, 0, 0, -1, 0, 1, 0;
    return m;
}

Mat4 mirror_x()
{
    Mat4 m = Mat4::Identity();
    m(0, 0) = -1.0;
    return m;
}

LabelVolume transform_world(const LabelVolume& vol, const Mat4& rigid)
{
    std::vector<Label> data(vol.data().begin(), vol.data().end());
    return reorient_to_ras(LabelVolume(vol.dims(), rigid * vol.affine(), std::move(data)));
}

}  // namespace ribmorph
