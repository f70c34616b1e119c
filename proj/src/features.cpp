#include "ribmorph/features.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "ribmorph/csv.hpp"
#include "ribmorph/error.hpp"

namespace ribmorph {

namespace {

constexpr const char* kAxisSuffix[3] = {"r", "a", "s"};

}  // namespace

Vec3 to_vertebra_frame(const Vec3& v, const Mat3& frame, Side side)
{
    Vec3 local = frame.transpose() * v;
    if (side == Side::Left) {
        local.x() = -local.x();
    }
    return local;
}

Vec3 compute_drc(const WorldPoint& start_point, const WorldPoint& corpus_center, const Mat3& frame, Side side)
{
    return to_vertebra_frame(start_point - corpus_center, frame, side);
}

std::vector<Vec3> compute_nppr(const PathPolyline& path, int n, const Mat3& frame, Side side)
{
    if (n < 2) {
        throw Error(ErrorCode::InvalidArgument, "n-PPR needs n >= 2");
    }
    if (path.points.size() < static_cast<std::size_t>(n)) {
        throw Error(ErrorCode::InsufficientPath, "path has " + std::to_string(path.points.size()) +
                                                     " points, " + std::to_string(n) + "-PPR needs " +
                                                     std::to_string(n));
    }
    std::vector<Vec3> out;
    for (int i = 1; i < n; ++i) {
        const Vec3 step = path.points[i] - path.points[i - 1];
        if (step.norm() < 1e-12) {
            throw Error(ErrorCode::DegenerateGeometry, "coincident path points");
        }
        out.push_back(to_vertebra_frame(step.normalized(), frame, side));
    }
    return out;
}

double volume_length_ratio(double rib_world_volume_mm3, double length_mm)
{
    if (!(length_mm > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "volume-to-length ratio needs a positive length");
    }
    return rib_world_volume_mm3 / length_mm;
}

RibFeatureRecord make_feature_record(const std::string& subject_id, Label rib_label, Side side,
                                     const PathPolyline& path, const VertebraInstance& vertebra,
                                     double rib_volume_mm3, double stump_threshold_mm)
{
    if (path.points.empty()) {
        throw Error(ErrorCode::InsufficientPath, "rib path is empty");
    }
    RibFeatureRecord r;
    r.subject_id = subject_id;
    r.rib_label = rib_label;
    r.side = side;
    r.length_mm = path.length_mm;
    r.is_stump = classify_stump(path.length_mm, stump_threshold_mm);
    r.drc = compute_drc(path.points.front(), vertebra.corpus_centroid, vertebra.frame.rotation, side);
    r.pdrc = r.drc.y();
    if (path.points.size() >= 2) {
        r.ppr = compute_nppr(path, static_cast<int>(path.points.size()), vertebra.frame.rotation, side);
    }
    r.volume_length_ratio = path.length_mm > 0.0 ? volume_length_ratio(rib_volume_mm3, path.length_mm) : 0.0;
    r.path_points = path.points.size();
    return r;
}

std::string FeatureSet::name() const
{
    if (ppr_points > 0 && drc) {
        return std::to_string(ppr_points) + "-PPR and DRC";
    }
    if (ppr_points > 0) {
        return std::to_string(ppr_points) + "-PPR";
    }
    return drc ? "DRC" : "";
}

std::size_t FeatureSet::column_count() const
{
    return (ppr_points > 0 ? 3 * static_cast<std::size_t>(ppr_points - 1) : 0) + (drc ? 3 : 0);
}

std::vector<std::string> FeatureSet::column_names() const
{
    std::vector<std::string> names;
    for (int i = 1; i < ppr_points; ++i) {
        for (const char* axis : kAxisSuffix) {
            names.push_back("ppr" + std::to_string(i) + "_" + axis);
        }
    }
    if (drc) {
        for (const char* axis : kAxisSuffix) {
            names.push_back(std::string("drc_") + axis);
        }
    }
    return names;
}

std::vector<FeatureSet> table5_feature_sets()
{
    return {{2, false}, {3, false}, {4, false}, {0, true}, {2, true}, {3, true}, {4, true}};
}

FeatureSet parse_feature_set(const std::string& name)
{
    for (const FeatureSet& set : table5_feature_sets()) {
        if (set.name() == name) {
            return set;
        }
    }
    // Accept any n-PPR spelling beyond the table rows.
    FeatureSet set;
    std::string rest = name;
    const std::string and_drc = " and DRC";
    if (rest.size() > and_drc.size() && rest.ends_with(and_drc)) {
        set.drc = true;
        rest.resize(rest.size() - and_drc.size());
    }
    if (rest.ends_with("-PPR")) {
        set.ppr_points = static_cast<int>(csv::parse_int(rest.substr(0, rest.size() - 4)));
        if (set.ppr_points >= 2) {
            return set;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown feature set '" + name + "'");
}

bool has_enough_path(const RibFeatureRecord& record, const FeatureSet& set)
{
    return set.ppr_points == 0 || record.ppr.size() + 1 >= static_cast<std::size_t>(set.ppr_points);
}

FeatureMatrix build_feature_matrix(std::vector<RibFeatureRecord> records, const FeatureSet& set)
{
    if (set.ppr_points == 1 || set.ppr_points < 0 || (set.ppr_points == 0 && !set.drc)) {
        throw Error(ErrorCode::InvalidArgument, "feature set selects no valid columns");
    }
    std::sort(records.begin(), records.end(), [](const RibFeatureRecord& a, const RibFeatureRecord& b) {
        return std::tie(a.subject_id, a.rib_label) < std::tie(b.subject_id, b.rib_label);
    });
    FeatureMatrix m;
    m.feature_set = set;
    m.columns = set.column_names();
    m.values.resize(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(set.column_count()));
    for (std::size_t row = 0; row < records.size(); ++row) {
        const RibFeatureRecord& r = records[row];
        if (!has_enough_path(r, set)) {
            throw Error(ErrorCode::InsufficientPath, "rib " + std::to_string(r.rib_label) + " of subject " +
                                                         r.subject_id + " is too short for " + set.name());
        }
        Eigen::Index col = 0;
        for (int i = 0; i + 1 < set.ppr_points; ++i) {
            for (int a = 0; a < 3; ++a) {
                m.values(static_cast<Eigen::Index>(row), col++) = r.ppr[static_cast<std::size_t>(i)][a];
            }
        }
        if (set.drc) {
            for (int a = 0; a < 3; ++a) {
                m.values(static_cast<Eigen::Index>(row), col++) = r.drc[a];
            }
        }
        m.subject_ids.push_back(r.subject_id);
        m.rib_labels.push_back(r.rib_label);
        m.is_stump.push_back(r.is_stump);
    }
    return m;
}

void write_feature_csv(std::ostream& out, const std::vector<RibFeatureRecord>& records)
{
    std::size_t k = 3;
    for (const auto& r : records) {
        k = std::max(k, r.ppr.size());
    }
    out << "schema_version,subject_id,rib_label,side,n_path_points";
    for (std::size_t i = 1; i <= k; ++i) {
        for (const char* axis : kAxisSuffix) {
            out << ",ppr" << i << '_' << axis;
        }
    }
    out << ",drc_r,drc_a,drc_s,pdrc,vol_len_ratio,length_mm,is_stump\n";
    for (const auto& r : records) {
        if (r.subject_id.find_first_of(",\n\r") != std::string::npos) {
            throw Error(ErrorCode::SchemaViolation, "subject id contains a CSV delimiter");
        }
        out << kFeatureCsvSchemaVersion << ',' << r.subject_id << ',' << r.rib_label << ','
            << to_string(r.side) << ',' << r.path_points;
        for (std::size_t i = 0; i < k; ++i) {
            for (int a = 0; a < 3; ++a) {
                out << ',';
                if (i < r.ppr.size()) {
                    out << csv::format_double(r.ppr[i][a]);
                }
            }
        }
        for (int a = 0; a < 3; ++a) {
            out << ',' << csv::format_double(r.drc[a]);
        }
        out << ',' << csv::format_double(r.pdrc) << ',' << csv::format_double(r.volume_length_ratio) << ','
            << csv::format_double(r.length_mm) << ',' << (r.is_stump ? 1 : 0) << '\n';
    }
}

std::vector<RibFeatureRecord> read_feature_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::SchemaViolation, "feature CSV is empty");
    }
    const auto header = csv::split_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col[header[i]] = i;
    }
    for (const char* required : {"schema_version", "subject_id", "rib_label", "side", "n_path_points", "drc_r",
                                 "drc_a", "drc_s", "pdrc", "vol_len_ratio", "length_mm", "is_stump"}) {
        if (col.count(required) == 0) {
            throw Error(ErrorCode::SchemaViolation, std::string("feature CSV lacks column '") + required + "'");
        }
    }
    std::size_t k = 0;
    while (col.count("ppr" + std::to_string(k + 1) + "_r") != 0) {
        ++k;
    }

    std::vector<RibFeatureRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto f = csv::split_line(line);
        if (f.size() != header.size()) {
            throw Error(ErrorCode::SchemaViolation, "line " + std::to_string(line_no) + " has " +
                                                        std::to_string(f.size()) + " fields, header has " +
                                                        std::to_string(header.size()));
        }
        if (csv::parse_int(f[col["schema_version"]]) != kFeatureCsvSchemaVersion) {
            throw Error(ErrorCode::SchemaViolation, "unsupported feature CSV schema version");
        }
        RibFeatureRecord r;
        r.subject_id = f[col["subject_id"]];
        r.rib_label = static_cast<Label>(csv::parse_int(f[col["rib_label"]]));
        r.side = side_from_string(f[col["side"]]);
        r.path_points = static_cast<std::size_t>(csv::parse_int(f[col["n_path_points"]]));
        for (std::size_t i = 1; i <= k; ++i) {
            const std::string& first = f[col["ppr" + std::to_string(i) + "_r"]];
            if (first.empty()) {
                break;
            }
            Vec3 v;
            for (int a = 0; a < 3; ++a) {
                v[a] = csv::parse_double(f[col["ppr" + std::to_string(i) + "_" + kAxisSuffix[a]]]);
            }
            r.ppr.push_back(v);
        }
        r.drc = Vec3(csv::parse_double(f[col["drc_r"]]), csv::parse_double(f[col["drc_a"]]),
                     csv::parse_double(f[col["drc_s"]]));
        r.pdrc = csv::parse_double(f[col["pdrc"]]);
        r.volume_length_ratio = csv::parse_double(f[col["vol_len_ratio"]]);
        r.length_mm = csv::parse_double(f[col["length_mm"]]);
        const auto stump = csv::parse_int(f[col["is_stump"]]);
        if (stump != 0 && stump != 1) {
            throw Error(ErrorCode::SchemaViolation, "is_stump must be 0 or 1");
        }
        r.is_stump = stump == 1;
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace ribmorph
