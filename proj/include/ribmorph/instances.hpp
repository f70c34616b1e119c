#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ribmorph/morphology.hpp"

namespace ribmorph {

enum class Side { Left, Right };

std::string_view to_string(Side side);
Side side_from_string(std::string_view text);

/// Assigned ribs get vertebra_label (Left) or vertebra_label + 100 (Right);
/// orphans are numbered upward from 200. Vertebra labels must lie in [1, 99].
inline constexpr Label kRightRibOffset = 100;
inline constexpr Label kOrphanLabelBase = 200;

Label anatomic_rib_label(Label vertebra_label, Side side);

struct VertebraFrame {
    /// Columns: Right, Anterior, Superior unit vectors in world coordinates.
    Mat3 rotation = Mat3::Identity();
    /// Set when the corpus offset gave no usable anterior direction and the
    /// world axes were used instead.
    bool degenerate = false;
};

struct VertebraInstance {
    Label label = 0;
    WorldPoint centroid = WorldPoint::Zero();
    WorldPoint corpus_centroid = WorldPoint::Zero();
    VertebraFrame frame;
    std::shared_ptr<const PointIndex> surface;
};

struct RibInstance {
    Label component_label = 0;
    std::size_t voxel_count = 0;
    double volume_mm3 = 0.0;
    WorldPoint centroid = WorldPoint::Zero();
    std::optional<Label> vertebra;
    std::optional<Side> side;
    /// Anatomic label when assigned, reserved orphan label otherwise.
    Label output_label = 0;
    std::shared_ptr<const PointIndex> surface;

    bool orphan() const noexcept { return !vertebra.has_value(); }
};

struct AssignmentTable {
    std::vector<RibInstance> ribs;
    /// Reserved labels handed to ribs without a vertebra, ascending.
    std::vector<Label> orphan_labels;
};

/**
 * Centre of the vertebral body. Uses the corpus mask's centroid when given.
 * Otherwise approximates the body as the anterior half of the vertebra: the
 * voxels whose world anterior (y) coordinate is at least the median.
 */
WorldPoint corpus_center(const BinaryMask& vertebra, const std::optional<BinaryMask>& corpus);

/**
 * Local anatomic frame of a vertebra. Superior is the hint (default world +z);
 * Anterior is the part of (corpus_center - vertebra centroid) orthogonal to
 * Superior; Right = Anterior x Superior.
 */
VertebraFrame vertebra_frame(const BinaryMask& vertebra, const WorldPoint& corpus_center,
                             const std::optional<Vec3>& superior_hint = std::nullopt);

VertebraInstance make_vertebra(Label label, const BinaryMask& vertebra,
                               const std::optional<BinaryMask>& corpus,
                               const std::optional<Vec3>& superior_hint = std::nullopt);

/**
 * One VertebraInstance per non-zero label of `vertebrae`, ascending by label.
 * `corpora` may hold per-vertebra labels or a single binary body mask that is
 * intersected with each vertebra.
 */
std::vector<VertebraInstance> extract_vertebrae(const LabelVolume& vertebrae,
                                                const LabelVolume* corpora,
                                                const std::optional<Vec3>& superior_hint = std::nullopt);

/// Unassigned RibInstance per component (label order).
std::vector<RibInstance> make_rib_instances(const ComponentSet& components);

/// Sign of the rib offset along the vertebra's Right axis. Throws
/// DegenerateGeometry when that component is below 1e-6 mm.
Side determine_side(const RibInstance& rib, const VertebraInstance& vertebra);

/**
 * Greedy rib-to-vertebra assignment by ascending minimal surface distance,
 * allowing at most one Left and one Right rib per vertebra. Unassigned ribs
 * are relabeled into the orphan range.
 */
AssignmentTable assign_ribs(const ComponentSet& components,
                            const std::vector<VertebraInstance>& vertebrae);

/// Rib instance map: each component painted with its output label.
LabelVolume instance_volume(const ComponentSet& components, const AssignmentTable& table);

nlohmann::json assignment_to_json(const AssignmentTable& table);

}  // namespace ribmorph
