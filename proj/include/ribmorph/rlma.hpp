#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ribmorph/morphology.hpp"

namespace ribmorph {

struct RlmaConfig {
    double shell_min_mm = 14.5;
    double shell_max_mm = 15.5;
    double step_fraction = 0.5;
    double start_refine_radius_mm = 5.0;
    double cone_half_angle_deg = 30.0;
    int cone_ray_count = 64;
    double cone_max_len_mm = 20.0;
    double ray_step_mm = 0.25;
    double resample_mm = 0.5;
    double crop_margin_mm = 2.0;
    int max_iterations = 500;

    /// Throws InvalidArgument when a field breaks its range.
    void validate() const;
};

enum class Termination { ConeEnd, NoCandidates, MaxIterations };

std::string_view to_string(Termination reason);

struct PathPolyline {
    std::vector<WorldPoint> points;
    double length_mm = 0.0;
    Termination reason = Termination::ConeEnd;

    /// Sum of consecutive Euclidean distances.
    static double polyline_length(const std::vector<WorldPoint>& points);
};

/**
 * A rib mask prepared for path tracing: world positions of all voxels and of
 * the surface voxels, plus the grid for occupancy lookups along rays.
 */
class RibGeometry {
public:
    /// Use the mask as-is (no crop/resample/fill).
    explicit RibGeometry(BinaryMask mask);

    /// Crop to the rib, resample to cfg.resample_mm isotropic, fill holes.
    static RibGeometry prepare(const BinaryMask& rib, const RlmaConfig& cfg);

    const BinaryMask& mask() const noexcept { return mask_; }
    const PointIndex& voxels() const noexcept { return voxels_; }
    const PointIndex& surface() const noexcept { return surface_; }
    bool occupied(const WorldPoint& p) const { return mask_.volume().sample_nearest(p) != 0; }

private:
    BinaryMask mask_;
    PointIndex voxels_;
    PointIndex surface_;
};

/// Start point: nearest surface voxel to the corpus centre, refined by the
/// mean of rib voxels within start_refine_radius_mm and re-projected onto the surface.
WorldPoint find_start_point(const RibGeometry& rib, const WorldPoint& corpus_center,
                            const RlmaConfig& cfg);

/**
 * One path step. Candidates are rib voxels whose distance to the last point is
 * within [shell_min, shell_max]; a candidate is dropped when it is strictly
 * closer to some earlier path point than to the last one. The step moves
 * step_fraction of the way towards the candidates' mean and snaps to the
 * nearest rib voxel. Returns nothing when no candidate survives.
 */
std::optional<WorldPoint> next_path_point(const RibGeometry& rib, const PathPolyline& path,
                                          const RlmaConfig& cfg);

/**
 * End point from a cone of rays around the last segment direction (or, for a
 * one-point path, the direction away from `corpus_center`). Each ray is
 * followed while it stays inside the rib; the farthest reached voxel over all
 * rays wins. Returns the last path point if no ray advances.
 */
WorldPoint terminal_point(const RibGeometry& rib, const PathPolyline& path,
                          const WorldPoint& corpus_center, const RlmaConfig& cfg);

/**
 * Cone directions: a golden-angle spiral over the spherical cap, each ray
 * paired with its reflection across the plane of `axis` and `reference`.
 * The azimuth origin follows `reference`, so the set moves with the scene
 * under rotations and reflections. World axes are used when `reference` is
 * parallel to `axis`.
 */
std::vector<Vec3> cone_directions(const Vec3& axis, const Vec3& reference, double half_angle_deg, int count);
std::vector<Vec3> cone_directions(const Vec3& axis, double half_angle_deg, int count);

/// Full measurement on a prepared geometry.
PathPolyline trace_rib(const RibGeometry& rib, const WorldPoint& corpus_center, const RlmaConfig& cfg);

/// Prepare + trace. Throws EmptyMask, or IterationCap when the step loop does not end.
PathPolyline measure_rib(const BinaryMask& rib, const WorldPoint& corpus_center,
                         const RlmaConfig& cfg = {});

inline constexpr double kStumpRibThresholdMm = 38.0;

/// Stump rib iff length <= threshold (inclusive).
bool classify_stump(double length_mm, double threshold_mm = kStumpRibThresholdMm);

nlohmann::json config_to_json(const RlmaConfig& cfg);
nlohmann::json path_to_json(const PathPolyline& path);

}  // namespace ribmorph
