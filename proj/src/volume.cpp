#include "ribmorph/volume.hpp"

#include <cmath>
#include <sstream>

#include "ribmorph/error.hpp"

namespace ribmorph {

namespace {

std::string describe(const VoxelCoord& v)
{
    std::ostringstream os;
    os << '(' << v.i << ',' << v.j << ',' << v.k << ')';
    return os.str();
}

}  // namespace

LabelVolume::LabelVolume(Dims dims, const Mat4& affine, std::vector<Label> data)
    : dims_(dims), affine_(affine), data_(std::move(data))
{
    for (int d : dims_) {
        if (d <= 0) {
            throw Error(ErrorCode::InvalidArgument, "volume dims must be positive");
        }
    }
    const std::size_t expected = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    if (data_.size() != expected) {
        throw Error(ErrorCode::InvalidArgument, "data length does not match dims");
    }
    if (!affine_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "affine has non-finite entries");
    }
    const Mat3 linear = affine_.topLeftCorner<3, 3>();
    for (int c = 0; c < 3; ++c) {
        spacing_[c] = linear.col(c).norm();
        if (spacing_[c] <= 0.0) {
            throw Error(ErrorCode::InvalidArgument, "affine column has zero length");
        }
    }
    const double scale = spacing_[0] * spacing_[1] * spacing_[2];
    if (std::abs(linear.determinant()) <= 1e-12 * scale) {
        throw Error(ErrorCode::InvalidArgument, "affine linear part is singular");
    }
    inverse_ = affine_.inverse();
}

LabelVolume LabelVolume::zeros(Dims dims, const Mat4& affine)
{
    std::size_t n = 1;
    for (int d : dims) {
        n *= static_cast<std::size_t>(std::max(d, 0));
    }
    return LabelVolume(dims, affine, std::vector<Label>(n, 0));
}

Mat4 LabelVolume::make_affine(const Vec3& spacing, const Vec3& origin)
{
    Mat4 a = Mat4::Identity();
    a(0, 0) = spacing.x();
    a(1, 1) = spacing.y();
    a(2, 2) = spacing.z();
    a.topRightCorner<3, 1>() = origin;
    return a;
}

double LabelVolume::voxel_volume() const
{
    return std::abs(affine_.topLeftCorner<3, 3>().determinant());
}

bool LabelVolume::contains(const VoxelCoord& v) const noexcept
{
    return v.i >= 0 && v.j >= 0 && v.k >= 0 && v.i < dims_[0] && v.j < dims_[1] &&
           v.k < dims_[2];
}

VoxelCoord LabelVolume::coord(std::size_t linear) const noexcept
{
    const auto nx = static_cast<std::size_t>(dims_[0]);
    const auto ny = static_cast<std::size_t>(dims_[1]);
    return VoxelCoord{static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny),
                      static_cast<int>(linear / (nx * ny))};
}

Label LabelVolume::at(const VoxelCoord& v) const
{
    if (!contains(v)) {
        throw Error(ErrorCode::OutOfBounds, "voxel " + describe(v) + " outside volume");
    }
    return data_[linear_index(v)];
}

WorldPoint LabelVolume::voxel_to_world(const VoxelCoord& v) const
{
    if (!contains(v)) {
        throw Error(ErrorCode::OutOfBounds, "voxel " + describe(v) + " outside volume");
    }
    return index_to_world(Vec3(v.i, v.j, v.k));
}

VoxelCoord LabelVolume::world_to_voxel(const WorldPoint& p) const
{
    const Vec3 idx = world_to_index(p);
    const VoxelCoord v{static_cast<int>(std::floor(idx.x() + 0.5)),
                       static_cast<int>(std::floor(idx.y() + 0.5)),
                       static_cast<int>(std::floor(idx.z() + 0.5))};
    if (!contains(v)) {
        throw Error(ErrorCode::OutOfBounds, "world point maps to voxel " + describe(v) +
                                                " outside volume");
    }
    return v;
}

WorldPoint LabelVolume::index_to_world(const Vec3& index) const
{
    return affine_.topLeftCorner<3, 3>() * index + affine_.topRightCorner<3, 1>();
}

Vec3 LabelVolume::world_to_index(const WorldPoint& p) const
{
    return inverse_.topLeftCorner<3, 3>() * p + inverse_.topRightCorner<3, 1>();
}

Label LabelVolume::sample_nearest(const WorldPoint& p) const
{
    const Vec3 idx = world_to_index(p);
    const VoxelCoord v{static_cast<int>(std::floor(idx.x() + 0.5)),
                       static_cast<int>(std::floor(idx.y() + 0.5)),
                       static_cast<int>(std::floor(idx.z() + 0.5))};
    return contains(v) ? data_[linear_index(v)] : 0;
}

bool LabelVolume::same_grid(const LabelVolume& other, double tolerance_mm) const
{
    if (dims_ != other.dims_) {
        return false;
    }
    return (affine_ - other.affine_).cwiseAbs().maxCoeff() <= tolerance_mm;
}

bool operator==(const LabelVolume& a, const LabelVolume& b)
{
    return a.dims_ == b.dims_ && a.affine_ == b.affine_ && a.data_ == b.data_;
}

LabelVolume LabelVolume::with_data(std::vector<Label> data) const
{
    return LabelVolume(dims_, affine_, std::move(data));
}

LabelVolume permute_axes(const LabelVolume& vol, const std::array<int, 3>& perm,
                         const std::array<bool, 3>& flip)
{
    std::array<bool, 3> seen{};
    for (int p : perm) {
        if (p < 0 || p > 2 || seen[p]) {
            throw Error(ErrorCode::InvalidArgument, "axis permutation is not a bijection");
        }
        seen[p] = true;
    }
    const Dims& in = vol.dims();
    const Dims out{in[perm[0]], in[perm[1]], in[perm[2]]};

    // input_index = P * output_index + c
    Mat3 P = Mat3::Zero();
    Vec3 c = Vec3::Zero();
    for (int a = 0; a < 3; ++a) {
        P(perm[a], a) = flip[a] ? -1.0 : 1.0;
        c[perm[a]] = flip[a] ? in[perm[a]] - 1 : 0;
    }
    const Mat3 linear = vol.affine().topLeftCorner<3, 3>();
    Mat4 affine = Mat4::Identity();
    affine.topLeftCorner<3, 3>() = linear * P;
    affine.topRightCorner<3, 1>() = linear * c + vol.affine().topRightCorner<3, 1>();

    std::vector<Label> data(vol.size());
    std::size_t o = 0;
    std::array<int, 3> src{};
    for (int z = 0; z < out[2]; ++z) {
        for (int y = 0; y < out[1]; ++y) {
            for (int x = 0; x < out[0]; ++x, ++o) {
                const std::array<int, 3> idx{x, y, z};
                for (int a = 0; a < 3; ++a) {
                    src[perm[a]] = flip[a] ? in[perm[a]] - 1 - idx[a] : idx[a];
                }
                data[o] = vol.at(VoxelCoord{src[0], src[1], src[2]});
            }
        }
    }
    return LabelVolume(out, affine, std::move(data));
}

namespace {

// For each voxel axis (column), the world axis that dominates it; -1 if the
// maximum is not unique.
std::array<int, 3> dominant_world_axes(const Mat3& linear)
{
    std::array<int, 3> axes{};
    for (int c = 0; c < 3; ++c) {
        const Vec3 col = linear.col(c).cwiseAbs();
        int best = 0;
        col.maxCoeff(&best);
        axes[c] = best;
        for (int r = 0; r < 3; ++r) {
            if (r != best && col[r] >= col[best] * (1.0 - 1e-6)) {
                axes[c] = -1;
            }
        }
    }
    return axes;
}

}  // namespace

bool is_ras_dominant(const Mat4& affine)
{
    const Mat3 linear = affine.topLeftCorner<3, 3>();
    const auto axes = dominant_world_axes(linear);
    for (int c = 0; c < 3; ++c) {
        if (axes[c] != c || linear(c, c) <= 0.0) {
            return false;
        }
    }
    return true;
}

LabelVolume reorient_to_ras(const LabelVolume& vol)
{
    const Mat3 linear = vol.affine().topLeftCorner<3, 3>();
    const auto axes = dominant_world_axes(linear);
    std::array<int, 3> perm{-1, -1, -1};
    for (int c = 0; c < 3; ++c) {
        if (axes[c] < 0 || perm[axes[c]] != -1) {
            throw Error(ErrorCode::NotAxisDominant,
                        "affine columns do not map onto distinct world axes");
        }
        perm[axes[c]] = c;
    }
    std::array<bool, 3> flip{};
    for (int a = 0; a < 3; ++a) {
        flip[a] = linear(a, perm[a]) < 0.0;
    }
    if (perm == std::array<int, 3>{0, 1, 2} && !flip[0] && !flip[1] && !flip[2]) {
        return vol;
    }
    return permute_axes(vol, perm, flip);
}

}  // namespace ribmorph
