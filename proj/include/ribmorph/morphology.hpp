#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "ribmorph/volume.hpp"

namespace ribmorph {

/// A LabelVolume restricted to the labels {0, 1}.
class BinaryMask {
public:
    /// Throws InvalidArgument if any label other than 0/1 occurs.
    explicit BinaryMask(LabelVolume vol);

    static BinaryMask nonzero(const LabelVolume& vol);
    static BinaryMask of_label(const LabelVolume& vol, Label label);
    static BinaryMask of_labels(const LabelVolume& vol, const std::set<Label>& labels);

    const LabelVolume& volume() const noexcept { return vol_; }
    const Dims& dims() const noexcept { return vol_.dims(); }
    bool operator[](std::size_t linear) const noexcept { return vol_[linear] != 0; }
    bool at(const VoxelCoord& v) const { return vol_.at(v) != 0; }
    std::size_t count() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }

private:
    LabelVolume vol_;
    std::size_t count_ = 0;
};

/// Inclusive voxel-index box.
struct BoundingBox {
    VoxelCoord lo;
    VoxelCoord hi;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class Connectivity { Six = 6, TwentySix = 26 };

struct ComponentSet {
    /// Component label per voxel; 0 is background, components are 1..count.
    LabelVolume labels;
    int count = 0;
    /// Indexed by label - 1.
    std::vector<std::size_t> voxel_counts;
    std::vector<BoundingBox> boxes;

    BinaryMask component(int label) const { return BinaryMask::of_label(labels, static_cast<Label>(label)); }
};

/**
 * Nearest-neighbour resampling to isotropic `target_spacing_mm`.
 *
 * Voxel directions are kept; output dims are ceil(dim * spacing / target) and
 * the grid is anchored so input and output voxel extents share their outer
 * corner. An integer down-ratio therefore maps each input voxel to an exact
 * block of output voxels.
 */
LabelVolume resample_nearest(const LabelVolume& vol, double target_spacing_mm);

/// Set every background voxel not 6-connected to the border background.
BinaryMask fill_holes(const BinaryMask& mask);

/// Components ordered by voxel count (descending), ties by first linear index.
ComponentSet connected_components(const BinaryMask& mask, Connectivity connectivity);

/// Unweighted mean of foreground voxel world positions. Throws EmptyMask.
WorldPoint centroid(const BinaryMask& mask);

/// Foreground voxels with a 6-neighbour that is background or outside the grid,
/// in ascending linear order.
std::vector<VoxelCoord> surface_voxels(const BinaryMask& mask);

/// World positions of surface voxels / all foreground voxels (linear order).
std::vector<Vec3> surface_points(const BinaryMask& mask);
std::vector<Vec3> foreground_points(const BinaryMask& mask);

/// Tightest box around voxels whose label is in `labels`. Throws EmptyMask when none.
BoundingBox bounding_box(const LabelVolume& vol, const std::set<Label>& labels);

/// Sub-volume [lo, hi] (inclusive) with the affine translated so world positions are kept.
LabelVolume extract_box(const LabelVolume& vol, const BoundingBox& box);

/**
 * Crop to the bounding box of `labels`, grown by margin_mm on every side
 * (ceil(margin / spacing) voxels per axis, clamped to the grid).
 */
LabelVolume crop_with_margin(const LabelVolume& vol, const std::set<Label>& labels,
                             double margin_mm);

}  // namespace ribmorph
