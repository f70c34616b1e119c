#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ribmorph/geometry.hpp"

namespace ribmorph {

using Label = std::uint32_t;
using Dims = std::array<int, 3>;

struct VoxelCoord {
    int i = 0;
    int j = 0;
    int k = 0;

    friend bool operator==(const VoxelCoord&, const VoxelCoord&) = default;
};

/**
 * Dense 3D label grid with a voxel-to-world affine.
 *
 * The voxel at (i, j, k) lives at linear index i + dims[0]*(j + dims[1]*k)
 * and its centre maps to world mm through affine * (i, j, k, 1). Spacing is
 * derived from the affine's column norms, never stored independently.
 * Instances are immutable once constructed.
 */
class LabelVolume {
public:
    LabelVolume(Dims dims, const Mat4& affine, std::vector<Label> data);

    /// Zero-filled volume.
    static LabelVolume zeros(Dims dims, const Mat4& affine);

    /// Axis-aligned affine: diag(spacing) with the given world origin for voxel (0,0,0).
    static Mat4 make_affine(const Vec3& spacing, const Vec3& origin);

    const Dims& dims() const noexcept { return dims_; }
    const Vec3& spacing() const noexcept { return spacing_; }
    const Mat4& affine() const noexcept { return affine_; }
    std::span<const Label> data() const noexcept { return data_; }
    std::size_t size() const noexcept { return data_.size(); }

    /// World volume of one voxel in mm^3 (|det| of the linear part).
    double voxel_volume() const;

    bool contains(const VoxelCoord& v) const noexcept;
    std::size_t linear_index(const VoxelCoord& v) const noexcept
    {
        return static_cast<std::size_t>(v.i) +
               static_cast<std::size_t>(dims_[0]) *
                   (static_cast<std::size_t>(v.j) + static_cast<std::size_t>(dims_[1]) * v.k);
    }
    VoxelCoord coord(std::size_t linear) const noexcept;

    Label operator[](std::size_t linear) const noexcept { return data_[linear]; }
    Label at(const VoxelCoord& v) const;

    /// affine * (i, j, k, 1). Throws OutOfBounds for coordinates outside dims.
    WorldPoint voxel_to_world(const VoxelCoord& v) const;
    /// Nearest voxel under the inverse affine. Throws OutOfBounds when it rounds outside.
    VoxelCoord world_to_voxel(const WorldPoint& p) const;

    /// Unchecked continuous variants.
    WorldPoint index_to_world(const Vec3& index) const;
    Vec3 world_to_index(const WorldPoint& p) const;
    /// Label at the voxel nearest to p, or 0 when p falls outside the grid.
    Label sample_nearest(const WorldPoint& p) const;

    /// Same dims and affines equal within `tolerance_mm` entry-wise.
    bool same_grid(const LabelVolume& other, double tolerance_mm = 1e-3) const;

    /// Exact field-wise equality.
    friend bool operator==(const LabelVolume& a, const LabelVolume& b);

    /// Copy of this volume with a different label array (same grid).
    LabelVolume with_data(std::vector<Label> data) const;

private:
    Dims dims_;
    Mat4 affine_;
    Mat4 inverse_;
    Vec3 spacing_;
    std::vector<Label> data_;
};

/**
 * Reindex a volume by permuting and flipping voxel axes while keeping every
 * voxel at the same world position. Output axis a reads input axis perm[a],
 * reversed when flip[a] is set.
 */
LabelVolume permute_axes(const LabelVolume& vol, const std::array<int, 3>& perm,
                         const std::array<bool, 3>& flip);

/**
 * Reorient so voxel axis a is dominated by world axis a with positive sign
 * (RAS-dominant). World positions are preserved exactly. Throws
 * NotAxisDominant when the affine's columns do not map onto distinct world
 * axes.
 */
LabelVolume reorient_to_ras(const LabelVolume& vol);

/// True when the 3x3 linear part is RAS-dominant (see reorient_to_ras).
bool is_ras_dominant(const Mat4& affine);

}  // namespace ribmorph
