#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace ribmorph {

/// World-space point or vector in mm, RAS frame (+x Right, +y Anterior, +z Superior).
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

using WorldPoint = Vec3;

/**
 * Static spatial index over a fixed point cloud.
 *
 * Answers nearest-neighbour and fixed-radius queries in world mm. Point
 * indices returned by the queries refer to the order of the input vector.
 */
class PointIndex {
public:
    PointIndex();
    explicit PointIndex(std::vector<Vec3> points);
    ~PointIndex();

    PointIndex(PointIndex&&) noexcept;
    PointIndex& operator=(PointIndex&&) noexcept;
    PointIndex(const PointIndex&) = delete;
    PointIndex& operator=(const PointIndex&) = delete;

    bool empty() const noexcept { return points_.empty(); }
    std::size_t size() const noexcept { return points_.size(); }
    const std::vector<Vec3>& points() const noexcept { return points_; }
    const Vec3& operator[](std::size_t i) const { return points_[i]; }

    /// Index of the closest point. Ties resolve to the smallest index.
    /// Precondition: non-empty.
    std::size_t nearest(const Vec3& query) const;

    /// Distance to the closest point. Precondition: non-empty.
    double nearest_distance(const Vec3& query) const;

    /// Indices (ascending) of all points with distance <= radius.
    std::vector<std::size_t> within(const Vec3& query, double radius) const;

private:
    struct Impl;
    std::vector<Vec3> points_;
    std::unique_ptr<Impl> impl_;
};

/// Smallest pairwise Euclidean distance between two non-empty point sets.
double min_set_distance(const PointIndex& a, const PointIndex& b);

/// Sum over a in `from` of the distance to the nearest point of `to`.
double sum_nearest_distances(const std::vector<Vec3>& from, const PointIndex& to);

}  // namespace ribmorph
