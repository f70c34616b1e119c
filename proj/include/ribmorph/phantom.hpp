#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "ribmorph/instances.hpp"
#include "ribmorph/morphology.hpp"

namespace ribmorph {

enum class CurveKind { Line, CircularArc, Helix };

/**
 * Parametric centreline with a closed-form length.
 *
 * Line: start -> end. Arc and helix: centre + radius * (cos t * u + sin t * v),
 * t in [0, sweep]; the helix also rises by pitch per turn along u x v.
 */
struct CurveSpec {
    CurveKind kind = CurveKind::Line;
    Vec3 start = Vec3::Zero();
    Vec3 end = Vec3::Zero();
    Vec3 center = Vec3::Zero();
    Vec3 u = Vec3::UnitX();
    Vec3 v = Vec3::UnitY();
    double radius = 0.0;
    double sweep_rad = 0.0;
    double pitch = 0.0;
    double tube_radius = 4.0;

    static CurveSpec line(const Vec3& start, const Vec3& end, double tube_radius);
    static CurveSpec arc(const Vec3& center, double radius, const Vec3& u, const Vec3& v, double sweep_rad,
                         double tube_radius);
    /// Arc that leaves `start` along `tangent` and bends towards `toward`.
    static CurveSpec arc_from(const Vec3& start, const Vec3& tangent, const Vec3& toward, double radius,
                              double length, double tube_radius);
    static CurveSpec helix(const Vec3& center, double radius, double pitch, double turns, const Vec3& u,
                           const Vec3& v, double tube_radius);

    /// Position at fraction s in [0, 1] of the arc length.
    Vec3 point(double s) const;
    /// Unit tangent at fraction s.
    Vec3 tangent(double s) const;
    /// Points every <= step mm, both ends included.
    std::vector<Vec3> sample(double step) const;
};

double analytic_length(const CurveSpec& curve);

struct GridSpec {
    Dims dims{1, 1, 1};
    double spacing = 1.0;
    Vec3 origin = Vec3::Zero();

    LabelVolume blank() const;
    /// Smallest grid covering [lo, hi] plus margin_mm on every side.
    static GridSpec covering(const Vec3& lo, const Vec3& hi, double spacing, double margin_mm);
};

/**
 * Voxels whose centre lies within tube_radius of the curve, with flat caps:
 * voxels beyond the plane through an endpoint, perpendicular to the end
 * tangent, are excluded. A zero-length curve yields a ball. The distance is
 * taken to curve samples spaced spacing/4 apart.
 * Throws OutOfBounds when the tube does not fit with one voxel of margin and
 * InvalidArgument when tube_radius < 2 * spacing.
 */
BinaryMask voxelize_tube(const CurveSpec& curve, const LabelVolume& grid);

struct SceneSpec {
    int n_vertebrae = 2;
    /// Ribs per side, attached to the uppermost vertebrae.
    int ribs_per_side = 2;
    /// Lengths for the lowest rib-bearing level: first the right rib, then the left.
    std::vector<double> stump_lengths;
    double spacing_mm = 1.0;
    double regular_length_mm = 150.0;
    double rib_curvature_radius_mm = 60.0;
    double tube_radius_mm = 4.0;
    Label first_vertebra_label = 18;
    double vertebra_pitch_mm = 32.0;
};

SceneSpec scene_spec_from_json(const nlohmann::json& j);
nlohmann::json scene_spec_to_json(const SceneSpec& spec);

struct RibTruth {
    Label label = 0;
    Label vertebra = 0;
    Side side = Side::Right;
    CurveSpec curve;
    double length_mm = 0.0;
    Vec3 start_point = Vec3::Zero();
    bool is_stump = false;
};

struct VertebraTruth {
    Label label = 0;
    Vec3 corpus_center = Vec3::Zero();
    Mat3 frame = Mat3::Identity();
};

struct PhantomScene {
    /// Ribs painted with their anatomic labels.
    LabelVolume ribs;
    LabelVolume vertebrae;
    /// Vertebral bodies, labelled like their vertebra.
    LabelVolume corpora;
    std::vector<RibTruth> rib_truth;
    std::vector<VertebraTruth> vertebra_truth;

    nlohmann::json truth_json() const;
};

/**
 * Stacked vertebrae along -z with ribs as circular arcs leaving the
 * transverse processes laterally, posteriorly and inferiorly, then bending
 * anteriorly. Left ribs mirror right ribs. Throws Overlap when two
 * structures touch or share a voxel.
 */
PhantomScene build_scene(const SceneSpec& spec);

/// 90 degree rotation about world z: (x, y, z) -> (-y, x, z).
Mat4 rotation_z90();
/// 90 degree rotation about world x: (x, y, z) -> (x, -z, y).
Mat4 rotation_x90();
/// Left-right mirror: x -> -x.
Mat4 mirror_x();

/// Moves the volume rigidly in world space (same voxel data, new affine),
/// then reorients to RAS-dominant.
LabelVolume transform_world(const LabelVolume& vol, const Mat4& rigid);

}  // namespace ribmorph
