#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ribmorph/instances.hpp"
#include "ribmorph/rlma.hpp"

namespace ribmorph {

/// Per-rib morphology, expressed in the vertebra frame with left ribs mirrored
/// onto the right side. Components are ordered (Right, Anterior, Superior).
struct RibFeatureRecord {
    std::string subject_id;
    Label rib_label = 0;
    Side side = Side::Right;
    double length_mm = 0.0;
    bool is_stump = false;
    /// Rib start point minus corpus centre.
    Vec3 drc = Vec3::Zero();
    /// Anterior component of drc; negative means the rib starts posterior of the body centre.
    double pdrc = 0.0;
    /// Unit directions between consecutive path points, all of them.
    std::vector<Vec3> ppr;
    double volume_length_ratio = 0.0;
    std::size_t path_points = 0;
};

/// frame^T * v, with the Right component negated for left ribs.
Vec3 to_vertebra_frame(const Vec3& v, const Mat3& frame, Side side);

Vec3 compute_drc(const WorldPoint& start_point, const WorldPoint& corpus_center, const Mat3& frame, Side side);

/// n-1 unit vectors between the first n path points. Throws InsufficientPath
/// when the path has fewer than n points, InvalidArgument for n < 2.
std::vector<Vec3> compute_nppr(const PathPolyline& path, int n, const Mat3& frame, Side side);

/// Throws InvalidArgument when length is not positive.
double volume_length_ratio(double rib_world_volume_mm3, double length_mm);

/// Assemble the full record for a measured rib.
RibFeatureRecord make_feature_record(const std::string& subject_id, Label rib_label, Side side,
                                     const PathPolyline& path, const VertebraInstance& vertebra,
                                     double rib_volume_mm3, double stump_threshold_mm = kStumpRibThresholdMm);

/// Classifier input selection: the first `ppr_points` path points and/or DRC.
struct FeatureSet {
    int ppr_points = 0;
    bool drc = false;

    std::string name() const;
    std::size_t column_count() const;
    std::vector<std::string> column_names() const;

    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

/// 2-, 3-, 4-PPR, DRC, then each n-PPR combined with DRC.
std::vector<FeatureSet> table5_feature_sets();
FeatureSet parse_feature_set(const std::string& name);

struct FeatureMatrix {
    FeatureSet feature_set;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
    std::vector<std::string> subject_ids;
    std::vector<Label> rib_labels;
    std::vector<bool> is_stump;
};

/// Records that carry enough path points for the set.
bool has_enough_path(const RibFeatureRecord& record, const FeatureSet& set);

/// Rows sorted by (subject id, rib label); columns are the flattened ppr
/// vectors followed by drc. Throws InsufficientPath for short paths.
FeatureMatrix build_feature_matrix(std::vector<RibFeatureRecord> records, const FeatureSet& set);

/// Cohort CSV with a header row; ppr columns span the longest record.
void write_feature_csv(std::ostream& out, const std::vector<RibFeatureRecord>& records);
std::vector<RibFeatureRecord> read_feature_csv(std::istream& in);

inline constexpr int kFeatureCsvSchemaVersion = 1;

}  // namespace ribmorph
