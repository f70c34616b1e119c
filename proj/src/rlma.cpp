#include "ribmorph/rlma.hpp"

#include <cmath>
#include <numbers>

#include "ribmorph/error.hpp"

namespace ribmorph {

void RlmaConfig::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw Error(ErrorCode::InvalidArgument, std::string("rlma config: ") + what);
        }
    };
    require(shell_min_mm > 0.0 && shell_min_mm < shell_max_mm, "need 0 < shell_min < shell_max");
    require(step_fraction > 0.0 && step_fraction <= 1.0, "step_fraction must be in (0, 1]");
    require(start_refine_radius_mm > 0.0, "start_refine_radius must be positive");
    require(cone_half_angle_deg > 0.0 && cone_half_angle_deg < 90.0, "cone half-angle must be in (0, 90)");
    require(cone_ray_count > 0, "cone_ray_count must be positive");
    require(cone_max_len_mm > 0.0, "cone_max_len must be positive");
    require(ray_step_mm > 0.0, "ray_step must be positive");
    require(resample_mm > 0.0, "resample spacing must be positive");
    require(crop_margin_mm >= 0.0, "crop margin must be non-negative");
    require(max_iterations > 0, "max_iterations must be positive");
}

std::string_view to_string(Termination reason)
{
    switch (reason) {
    case Termination::ConeEnd: return "cone_end";
    case Termination::NoCandidates: return "no_candidates";
    case Termination::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

double PathPolyline::polyline_length(const std::vector<WorldPoint>& points)
{
    double length = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        length += (points[i] - points[i - 1]).norm();
    }
    return length;
}

RibGeometry::RibGeometry(BinaryMask mask)
    : mask_(std::move(mask)), voxels_(foreground_points(mask_)), surface_(surface_points(mask_))
{
    if (mask_.empty()) {
        throw Error(ErrorCode::EmptyMask, "rib mask is empty");
    }
}

RibGeometry RibGeometry::prepare(const BinaryMask& rib, const RlmaConfig& cfg)
{
    cfg.validate();
    if (rib.empty()) {
        throw Error(ErrorCode::EmptyMask, "rib mask is empty");
    }
    const LabelVolume cropped = crop_with_margin(rib.volume(), {1}, cfg.crop_margin_mm);
    const LabelVolume iso = resample_nearest(cropped, cfg.resample_mm);
    return RibGeometry(fill_holes(BinaryMask(iso)));
}

WorldPoint find_start_point(const RibGeometry& rib, const WorldPoint& corpus_center, const RlmaConfig& cfg)
{
    const WorldPoint closest = rib.surface()[rib.surface().nearest(corpus_center)];
    const auto around = rib.voxels().within(closest, cfg.start_refine_radius_mm);
    Vec3 mean = Vec3::Zero();
    for (std::size_t i : around) {
        mean += rib.voxels()[i];
    }
    mean /= static_cast<double>(around.size());
    return rib.surface()[rib.surface().nearest(mean)];
}

std::optional<WorldPoint> next_path_point(const RibGeometry& rib, const PathPolyline& path, const RlmaConfig& cfg)
{
    if (path.points.empty()) {
        throw Error(ErrorCode::InvalidArgument, "path has no points");
    }
    const WorldPoint& last = path.points.back();
    const double lo2 = cfg.shell_min_mm * cfg.shell_min_mm;

    Vec3 sum = Vec3::Zero();
    std::size_t count = 0;
    for (std::size_t i : rib.voxels().within(last, cfg.shell_max_mm)) {
        const Vec3& c = rib.voxels()[i];
        const double to_last = (c - last).squaredNorm();
        if (to_last < lo2) {
            continue;
        }
        bool behind = false;
        for (std::size_t p = 0; p + 1 < path.points.size(); ++p) {
            if ((c - path.points[p]).squaredNorm() < to_last) {
                behind = true;
                break;
            }
        }
        if (!behind) {
            sum += c;
            ++count;
        }
    }
    if (count == 0) {
        return std::nullopt;
    }
    const Vec3 direction = sum / static_cast<double>(count) - last;
    const WorldPoint target = last + cfg.step_fraction * direction;
    const WorldPoint next = rib.voxels()[rib.voxels().nearest(target)];
    // A step that snaps back onto the last point cannot make progress.
    if ((next - last).norm() < 1e-9) {
        return std::nullopt;
    }
    return next;
}

std::vector<Vec3> cone_directions(const Vec3& axis, const Vec3& reference, double half_angle_deg, int count)
{
    const Vec3 w = axis.normalized();
    Vec3 u = reference - reference.dot(w) * w;
    if (u.norm() < 1e-6 * std::max(1.0, reference.norm())) {
        int least = 0;
        w.cwiseAbs().minCoeff(&least);
        u = w.cross(Vec3::Unit(least));
    }
    u.normalize();
    const Vec3 v = w.cross(u);

    const double cos_max = std::cos(half_angle_deg * std::numbers::pi / 180.0);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    const int levels = (count + 1) / 2;
    std::vector<Vec3> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < levels; ++i) {
        const double cos_t = 1.0 - (i + 0.5) / levels * (1.0 - cos_max);
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        const double phi = golden * i;
        for (double sign : {1.0, -1.0}) {
            if (static_cast<int>(dirs.size()) < count) {
                dirs.push_back((cos_t * w + sin_t * (std::cos(phi) * u + sign * std::sin(phi) * v)).normalized());
            }
        }
    }
    return dirs;
}

std::vector<Vec3> cone_directions(const Vec3& axis, double half_angle_deg, int count)
{
    return cone_directions(axis, Vec3::Zero(), half_angle_deg, count);
}

WorldPoint terminal_point(const RibGeometry& rib, const PathPolyline& path, const WorldPoint& corpus_center,
                          const RlmaConfig& cfg)
{
    if (path.points.empty()) {
        throw Error(ErrorCode::InvalidArgument, "path has no points");
    }
    const WorldPoint& last = path.points.back();
    Vec3 axis = path.points.size() >= 2 ? Vec3(last - path.points[path.points.size() - 2])
                                        : Vec3(last - corpus_center);
    if (axis.norm() < 1e-12) {
        return last;
    }
    const LabelVolume& grid = rib.mask().volume();

    WorldPoint best = last;
    double best_distance = 0.0;
    const Vec3 reference = corpus_center - last;
    for (const Vec3& dir : cone_directions(axis, reference, cfg.cone_half_angle_deg, cfg.cone_ray_count)) {
        for (double t = cfg.ray_step_mm; t <= cfg.cone_max_len_mm + 1e-9; t += cfg.ray_step_mm) {
            const WorldPoint sample = last + t * dir;
            if (!rib.occupied(sample)) {
                break;
            }
            const Vec3 snapped = (grid.world_to_index(sample).array() + 0.5).floor();
            const WorldPoint voxel = grid.index_to_world(snapped);
            const double d = (voxel - last).norm();
            if (d > best_distance + 1e-12) {
                best_distance = d;
                best = voxel;
            }
        }
    }
    return best;
}

PathPolyline trace_rib(const RibGeometry& rib, const WorldPoint& corpus_center, const RlmaConfig& cfg)
{
    cfg.validate();
    PathPolyline path;
    path.points.push_back(find_start_point(rib, corpus_center, cfg));
    bool capped = true;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        const auto next = next_path_point(rib, path, cfg);
        if (!next) {
            capped = false;
            break;
        }
        path.points.push_back(*next);
    }
    if (capped) {
        path.reason = Termination::MaxIterations;
        path.length_mm = PathPolyline::polyline_length(path.points);
        return path;
    }
    const WorldPoint end = terminal_point(rib, path, corpus_center, cfg);
    if ((end - path.points.back()).norm() > 1e-9) {
        path.points.push_back(end);
        path.reason = Termination::ConeEnd;
    } else {
        path.reason = Termination::NoCandidates;
    }
    path.length_mm = PathPolyline::polyline_length(path.points);
    return path;
}

PathPolyline measure_rib(const BinaryMask& rib, const WorldPoint& corpus_center, const RlmaConfig& cfg)
{
    const RibGeometry geometry = RibGeometry::prepare(rib, cfg);
    PathPolyline path = trace_rib(geometry, corpus_center, cfg);
    if (path.reason == Termination::MaxIterations) {
        throw Error(ErrorCode::IterationCap,
                    "path did not terminate within " + std::to_string(cfg.max_iterations) + " steps");
    }
    return path;
}

bool classify_stump(double length_mm, double threshold_mm)
{
    if (length_mm < 0.0 || !std::isfinite(length_mm)) {
        throw Error(ErrorCode::InvalidArgument, "rib length must be a non-negative number");
    }
    return length_mm <= threshold_mm;
}

nlohmann::json config_to_json(const RlmaConfig& cfg)
{
    return nlohmann::json{
        {"shell_min_mm", cfg.shell_min_mm},
        {"shell_max_mm", cfg.shell_max_mm},
        {"step_fraction", cfg.step_fraction},
        {"start_refine_radius_mm", cfg.start_refine_radius_mm},
        {"cone_half_angle_deg", cfg.cone_half_angle_deg},
        {"cone_ray_count", cfg.cone_ray_count},
        {"cone_max_len_mm", cfg.cone_max_len_mm},
        {"ray_step_mm", cfg.ray_step_mm},
        {"resample_mm", cfg.resample_mm},
        {"crop_margin_mm", cfg.crop_margin_mm},
        {"max_iterations", cfg.max_iterations},
    };
}

nlohmann::json path_to_json(const PathPolyline& path)
{
    nlohmann::json points = nlohmann::json::array();
    for (const WorldPoint& p : path.points) {
        points.push_back({p.x(), p.y(), p.z()});
    }
    return nlohmann::json{{"points_mm", points},
                          {"length_mm", path.length_mm},
                          {"termination", std::string(to_string(path.reason))}};
}

}  // namespace ribmorph
