#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "ribmorph/morphology.hpp"

namespace ribmorph {

/// Instances with DSC at or above this count as true positives.
inline constexpr double kMatchThreshold = 0.5;

/// 2|X & Y| / (|X| + |Y|); 1 when both are empty. Throws GridMismatch.
double dice(const BinaryMask& x, const BinaryMask& y);

/**
 * Average symmetric surface distance in mm. Surfaces are the 6-neighbourhood
 * boundary voxels; the summed nearest-neighbour distances in both directions
 * are divided by the total number of boundary voxels.
 */
double assd(const BinaryMask& x, const BinaryMask& y);

struct MatchedPair {
    Label reference = 0;
    Label prediction = 0;
    double dsc = 0.0;
};

struct InstanceMatching {
    std::vector<MatchedPair> matches;
    std::vector<Label> unmatched_predictions;
    std::vector<Label> unmatched_references;

    std::size_t tp() const noexcept { return matches.size(); }
    std::size_t fp() const noexcept { return unmatched_predictions.size(); }
    std::size_t fn() const noexcept { return unmatched_references.size(); }
};

/// DSC between every overlapping (reference, prediction) instance pair.
std::vector<MatchedPair> pairwise_dice(const LabelVolume& prediction, const LabelVolume& reference);

/**
 * One-to-one matching: overlapping pairs with DSC >= 0.5 are accepted in
 * descending DSC order (ties by smaller reference, then prediction label)
 * while both instances are still free.
 */
InstanceMatching match_instances(const LabelVolume& prediction, const LabelVolume& reference);

struct PanopticScores {
    double rq = 0.0;
    /// Mean metric over matched pairs; absent when there are none.
    std::optional<double> sq;
    std::optional<double> pq;
};

/// tp / (tp + (fp + fn) / 2), SQ as the mean of `pair_values`, PQ = SQ * RQ.
/// With no instances on either side RQ is 1. With tp = 0, SQ and PQ are absent.
PanopticScores panoptic(std::size_t fp, std::size_t fn, const std::vector<double>& pair_values);

struct PanopticReport {
    double binary_dsc = 0.0;
    InstanceMatching matching;
    double rq = 0.0;
    double sq_dsc = 0.0;
    double pq_dsc = 0.0;
    std::optional<double> sq_assd;
    std::optional<double> pq_assd;
};

/// Full evaluation of a predicted instance map against a reference map.
PanopticReport evaluate_segmentation(const LabelVolume& prediction, const LabelVolume& reference);

nlohmann::json report_to_json(const PanopticReport& report);

}  // namespace ribmorph
