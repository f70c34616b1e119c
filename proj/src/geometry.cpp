#include "ribmorph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <boost/iterator/function_output_iterator.hpp>

#include "ribmorph/error.hpp"

namespace ribmorph {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace {

using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;
using Entry = std::pair<BPoint, std::size_t>;
using Tree = bgi::rtree<Entry, bgi::quadratic<16>>;

BPoint to_bpoint(const Vec3& p) { return BPoint(p.x(), p.y(), p.z()); }

}  // namespace

struct PointIndex::Impl {
    Tree tree;
};

PointIndex::PointIndex() = default;
PointIndex::~PointIndex() = default;
PointIndex::PointIndex(PointIndex&&) noexcept = default;
PointIndex& PointIndex::operator=(PointIndex&&) noexcept = default;

PointIndex::PointIndex(std::vector<Vec3> points) : points_(std::move(points))
{
    std::vector<Entry> entries;
    entries.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
        entries.emplace_back(to_bpoint(points_[i]), i);
    }
    // Packing constructor: bulk-loaded, deterministic for a given input order.
    impl_ = std::make_unique<Impl>(Impl{Tree(entries.begin(), entries.end())});
}

std::size_t PointIndex::nearest(const Vec3& query) const
{
    if (empty()) {
        throw Error(ErrorCode::EmptyMask, "nearest query on an empty point set");
    }
    // Exact ties resolve to the smallest index: re-scan the ball at the best
    // distance, whose hits come back in ascending index order.
    std::vector<Entry> hit;
    impl_->tree.query(bgi::nearest(to_bpoint(query), 1), std::back_inserter(hit));
    const double best = (points_[hit.front().second] - query).norm();
    const double slack = 1e-9 * std::max(1.0, best);
    for (std::size_t i : within(query, best + slack)) {
        if ((points_[i] - query).norm() <= best + slack) {
            return i;
        }
    }
    return hit.front().second;
}

double PointIndex::nearest_distance(const Vec3& query) const
{
    if (empty()) {
        throw Error(ErrorCode::EmptyMask, "nearest query on an empty point set");
    }
    std::vector<Entry> hit;
    impl_->tree.query(bgi::nearest(to_bpoint(query), 1), std::back_inserter(hit));
    return (points_[hit.front().second] - query).norm();
}

std::vector<std::size_t> PointIndex::within(const Vec3& query, double radius) const
{
    std::vector<std::size_t> out;
    if (empty() || radius < 0.0) {
        return out;
    }
    const BBox box(BPoint(query.x() - radius, query.y() - radius, query.z() - radius),
                   BPoint(query.x() + radius, query.y() + radius, query.z() + radius));
    const double r2 = radius * radius;
    impl_->tree.query(bgi::intersects(box),
                      boost::make_function_output_iterator([&](const Entry& e) {
                          if ((points_[e.second] - query).squaredNorm() <= r2) {
                              out.push_back(e.second);
                          }
                      }));
    std::sort(out.begin(), out.end());
    return out;
}

double min_set_distance(const PointIndex& a, const PointIndex& b)
{
    if (a.empty() || b.empty()) {
        throw Error(ErrorCode::EmptyMask, "set distance needs two non-empty sets");
    }
    const PointIndex& small = a.size() <= b.size() ? a : b;
    const PointIndex& large = a.size() <= b.size() ? b : a;
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : small.points()) {
        best = std::min(best, large.nearest_distance(p));
        if (best == 0.0) {
            break;
        }
    }
    return best;
}

double sum_nearest_distances(const std::vector<Vec3>& from, const PointIndex& to)
{
    double sum = 0.0;
    for (const Vec3& p : from) {
        sum += to.nearest_distance(p);
    }
    return sum;
}

}  // namespace ribmorph
