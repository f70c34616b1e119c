#include "ribmorph/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "ribmorph/csv.hpp"
#include "ribmorph/error.hpp"
#include "ribmorph/nifti.hpp"
#include "ribmorph/parallel.hpp"
#include "ribmorph/phantom.hpp"
#include "ribmorph/stats.hpp"

namespace ribmorph {

namespace fs = std::filesystem;

namespace {

nlohmann::json vec_json(const Vec3& v)
{
    return nlohmann::json::array({v.x(), v.y(), v.z()});
}

nlohmann::json features_json(const RibFeatureRecord& r)
{
    nlohmann::json ppr = nlohmann::json::array();
    for (const Vec3& d : r.ppr) {
        ppr.push_back(vec_json(d));
    }
    return {{"drc_ras", vec_json(r.drc)}, {"pdrc", r.pdrc}, {"ppr_ras", ppr}, {"volume_length_ratio", r.volume_length_ratio}};
}

void require_grid(const LabelVolume& a, const LabelVolume& b, const char* what)
{
    if (!a.same_grid(b)) {
        throw Error(ErrorCode::GridMismatch, std::string(what) + " is not aligned with the rib mask");
    }
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path, std::vector<std::string>& header)
{
    std::istringstream in(read_text_file(path));
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto fields = csv::split_line(line);
        if (first) {
            header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != header.size()) {
                throw Error(ErrorCode::SchemaViolation, path.string() + ": row has " + std::to_string(fields.size()) +
                                                            " fields, header has " + std::to_string(header.size()));
            }
            rows.push_back(std::move(fields));
        }
    }
    if (first) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": missing header");
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const fs::path& path)
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": missing column " + name);
    }
    return static_cast<std::size_t>(it - header.begin());
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

nlohmann::json rank_sum_json(const std::vector<double>& stumps, const std::vector<double>& regular)
{
    const TestResult t = wilcoxon_rank_sum(stumps, regular);
    return {{"statistic_u", t.statistic},
            {"p_value", t.p_value},
            {"method", t.method == TestMethod::Exact ? "exact" : "normal_approx"},
            {"n_stump", t.n},
            {"n_regular", t.m}};
}

}  // namespace

bool SubjectAnalysis::has_errors() const
{
    return std::any_of(ribs.begin(), ribs.end(), [](const RibResult& r) { return r.error.has_value(); });
}

std::vector<RibFeatureRecord> SubjectAnalysis::feature_records() const
{
    std::vector<RibFeatureRecord> out;
    for (const RibResult& r : ribs) {
        if (r.features) {
            out.push_back(*r.features);
        }
    }
    return out;
}

nlohmann::json SubjectAnalysis::to_json(const AnalyzeOptions& options) const
{
    nlohmann::json verts = nlohmann::json::array();
    for (const VertebraInstance& v : vertebrae) {
        nlohmann::json frame = nlohmann::json::array();
        for (int c = 0; c < 3; ++c) {
            frame.push_back(vec_json(v.frame.rotation.col(c)));
        }
        verts.push_back({{"label", v.label},
                         {"centroid", vec_json(v.centroid)},
                         {"corpus_center", vec_json(v.corpus_centroid)},
                         {"frame_columns_ras", frame},
                         {"frame_degenerate", v.frame.degenerate}});
    }
    nlohmann::json rib_list = nlohmann::json::array();
    std::size_t stumps = 0;
    for (const RibResult& r : ribs) {
        nlohmann::json j{{"label", r.instance.output_label},
                         {"component", r.instance.component_label},
                         {"voxel_count", r.instance.voxel_count},
                         {"volume_mm3", r.instance.volume_mm3},
                         {"centroid", vec_json(r.instance.centroid)},
                         {"orphan", r.instance.orphan()},
                         {"vertebra", r.instance.vertebra ? nlohmann::json(*r.instance.vertebra) : nlohmann::json(nullptr)},
                         {"side", r.instance.side ? nlohmann::json(std::string(to_string(*r.instance.side))) : nlohmann::json(nullptr)},
                         {"measured", r.path.has_value()}};
        if (r.path) {
            j["path"] = path_to_json(*r.path);
            j["length_mm"] = r.path->length_mm;
            j["is_stump"] = classify_stump(r.path->length_mm, options.stump_threshold_mm);
            stumps += classify_stump(r.path->length_mm, options.stump_threshold_mm) ? 1 : 0;
        }
        if (r.features) {
            j["features"] = features_json(*r.features);
        }
        if (r.error) {
            j["error"] = *r.error;
        }
        rib_list.push_back(j);
    }
    return {{"schema_version", kReportSchemaVersion},
            {"subject_id", subject_id},
            {"status", ribs.empty() ? "no ribs found" : (has_errors() ? "errors" : "ok")},
            {"stump_threshold_mm", options.stump_threshold_mm},
            {"lowest_two", options.lowest_two},
            {"rlma_config", config_to_json(options.rlma)},
            {"vertebrae", verts},
            {"ribs", rib_list},
            {"stump_count", stumps},
            {"notes", notes}};
}

SubjectAnalysis analyze_subject(const std::string& subject_id, const LabelVolume& ribs, const LabelVolume& vertebrae,
                                const LabelVolume* corpora, const AnalyzeOptions& options)
{
    options.rlma.validate();
    if (!(options.stump_threshold_mm > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "stump threshold must be positive");
    }
    require_grid(ribs, vertebrae, "vertebra mask");
    if (corpora != nullptr) {
        require_grid(ribs, *corpora, "corpus mask");
    }
    SubjectAnalysis out{subject_id, {}, {}, ribs.with_data(std::vector<Label>(ribs.size(), 0)), {}};
    const BinaryMask rib_mask = BinaryMask::nonzero(ribs);
    if (rib_mask.empty()) {
        out.notes.push_back("no ribs found");
        return out;
    }
    out.vertebrae = extract_vertebrae(vertebrae, corpora, options.superior_hint);
    if (out.vertebrae.empty()) {
        out.notes.push_back("no vertebrae found; all ribs are orphans");
    }
    const ComponentSet components = connected_components(rib_mask, Connectivity::TwentySix);
    const AssignmentTable table = assign_ribs(components, out.vertebrae);
    out.instances = instance_volume(components, table);

    std::set<Label> measured_levels;
    for (const RibInstance& r : table.ribs) {
        if (r.vertebra) {
            measured_levels.insert(*r.vertebra);
        }
    }
    if (options.lowest_two) {
        while (measured_levels.size() > 2) {
            measured_levels.erase(measured_levels.begin());
        }
    }

    std::map<Label, const VertebraInstance*> by_label;
    for (const VertebraInstance& v : out.vertebrae) {
        by_label[v.label] = &v;
    }
    out.ribs.resize(table.ribs.size());
    parallel_for(table.ribs.size(), options.jobs, [&](std::size_t n) {
        RibResult& result = out.ribs[n];
        result.instance = table.ribs[n];
        if (result.instance.orphan() || measured_levels.count(*result.instance.vertebra) == 0) {
            result.skipped = true;
            return;
        }
        const VertebraInstance& v = *by_label.at(*result.instance.vertebra);
        try {
            result.path = measure_rib(components.component(static_cast<int>(result.instance.component_label)),
                                      v.corpus_centroid, options.rlma);
            result.features = make_feature_record(subject_id, result.instance.output_label, *result.instance.side,
                                                  *result.path, v, result.instance.volume_mm3, options.stump_threshold_mm);
        } catch (const Error& e) {
            result.error = e.what();
        }
    });
    return out;
}

std::vector<SubjectInput> read_manifest(const fs::path& manifest)
{
    std::vector<std::string> header;
    const auto rows = read_csv_rows(manifest, header);
    const std::size_t id = column(header, "subject_id", manifest);
    const std::size_t ribs = column(header, "ribs", manifest);
    const std::size_t verts = column(header, "vertebrae", manifest);
    const auto corpus_it = std::find(header.begin(), header.end(), "corpus");
    const fs::path base = manifest.parent_path();
    std::vector<SubjectInput> out;
    for (const auto& row : rows) {
        SubjectInput s{row[id], resolve(base, row[ribs]), resolve(base, row[verts]), std::nullopt};
        if (corpus_it != header.end()) {
            const std::string& c = row[static_cast<std::size_t>(corpus_it - header.begin())];
            if (!c.empty()) {
                s.corpus = resolve(base, c);
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

AnalyzeSummary run_analyze(const std::vector<SubjectInput>& subjects, const fs::path& out_dir,
                           const AnalyzeOptions& options)
{
    fs::create_directories(out_dir);
    std::set<std::string> ids;
    for (const auto& s : subjects) {
        if (s.subject_id.empty() || !ids.insert(s.subject_id).second) {
            throw Error(ErrorCode::InvalidArgument, "subject ids must be non-empty and unique");
        }
    }
    AnalyzeOptions inner = options;
    inner.jobs = 1;
    std::vector<std::optional<SubjectAnalysis>> results(subjects.size());
    std::vector<std::string> failures(subjects.size());
    std::mutex write_mutex;
    parallel_for(subjects.size(), options.jobs, [&](std::size_t n) {
        const SubjectInput& s = subjects[n];
        try {
            const LabelVolume ribs = read_nifti_file(s.ribs);
            const LabelVolume vertebrae = read_nifti_file(s.vertebrae);
            std::optional<LabelVolume> corpus;
            if (s.corpus) {
                corpus = read_nifti_file(*s.corpus);
            }
            SubjectAnalysis a = analyze_subject(s.subject_id, ribs, vertebrae, corpus ? &*corpus : nullptr,
                                                subjects.size() == 1 ? options : inner);
            const std::lock_guard lock(write_mutex);
            write_text_file(out_dir / (s.subject_id + ".json"), a.to_json(options).dump(2) + "\n");
            write_nifti_file(out_dir / (s.subject_id + "_instances.nii.gz"), a.instances);
            results[n] = std::move(a);
        } catch (const Error& e) {
            failures[n] = e.what();
        }
    });

    AnalyzeSummary summary;
    std::vector<RibFeatureRecord> records;
    nlohmann::json per_subject = nlohmann::json::array();
    std::size_t subjects_with_stump = 0;
    std::size_t analyzed = 0;
    for (std::size_t n = 0; n < subjects.size(); ++n) {
        nlohmann::json entry{{"subject_id", subjects[n].subject_id}};
        if (!results[n]) {
            entry["status"] = "failed";
            entry["error"] = failures[n];
            summary.errors = true;
        } else {
            const SubjectAnalysis& a = *results[n];
            ++analyzed;
            const auto recs = a.feature_records();
            const bool stump = std::any_of(recs.begin(), recs.end(), [](const RibFeatureRecord& r) { return r.is_stump; });
            subjects_with_stump += stump ? 1 : 0;
            entry["status"] = a.ribs.empty() ? "no ribs found" : (a.has_errors() ? "errors" : "ok");
            entry["ribs"] = a.ribs.size();
            entry["measured_ribs"] = recs.size();
            entry["has_stump_rib"] = stump;
            summary.errors = summary.errors || a.has_errors();
            records.insert(records.end(), recs.begin(), recs.end());
        }
        per_subject.push_back(entry);
    }
    {
        std::ostringstream csv_out;
        write_feature_csv(csv_out, records);
        write_text_file(out_dir / "features.csv", csv_out.str());
    }
    std::vector<double> pdrc_s, pdrc_r, ratio_s, ratio_r;
    std::size_t stump_ribs = 0;
    for (const auto& r : records) {
        (r.is_stump ? pdrc_s : pdrc_r).push_back(r.pdrc);
        (r.is_stump ? ratio_s : ratio_r).push_back(r.volume_length_ratio);
        stump_ribs += r.is_stump ? 1 : 0;
    }
    nlohmann::json s{{"schema_version", kReportSchemaVersion},
                     {"subjects", subjects.size()},
                     {"analyzed_subjects", analyzed},
                     {"measured_ribs", records.size()},
                     {"stump_ribs", stump_ribs},
                     {"subjects_with_stump_rib", subjects_with_stump},
                     {"stump_prevalence", analyzed > 0 ? static_cast<double>(subjects_with_stump) / static_cast<double>(analyzed) : 0.0},
                     {"stump_threshold_mm", options.stump_threshold_mm},
                     {"per_subject", per_subject}};
    if (!pdrc_s.empty() && !pdrc_r.empty()) {
        s["rank_sum_pdrc"] = rank_sum_json(pdrc_s, pdrc_r);
        s["rank_sum_volume_length_ratio"] = rank_sum_json(ratio_s, ratio_r);
    }
    write_text_file(out_dir / "summary.json", s.dump(2) + "\n");
    summary.summary = std::move(s);
    return summary;
}

std::vector<EvaluationInput> read_evaluation_manifest(const fs::path& manifest)
{
    std::vector<std::string> header;
    const auto rows = read_csv_rows(manifest, header);
    const std::size_t id = column(header, "subject_id", manifest);
    const std::size_t pred = column(header, "prediction", manifest);
    const std::size_t ref = column(header, "reference", manifest);
    const fs::path base = manifest.parent_path();
    std::vector<EvaluationInput> out;
    for (const auto& row : rows) {
        out.push_back({row[id], resolve(base, row[pred]), resolve(base, row[ref])});
    }
    return out;
}

nlohmann::json run_evaluate(const std::vector<EvaluationInput>& inputs, const fs::path& out_dir, int jobs)
{
    fs::create_directories(out_dir);
    std::vector<PanopticReport> reports(inputs.size());
    parallel_for(inputs.size(), jobs, [&](std::size_t n) {
        reports[n] = evaluate_segmentation(read_nifti_file(inputs[n].prediction), read_nifti_file(inputs[n].reference));
    });

    nlohmann::json subjects = nlohmann::json::array();
    std::map<std::string, std::vector<double>> values;
    const std::vector<std::string> order{"binary_dsc", "rq", "sq_dsc", "pq_dsc", "sq_assd", "pq_assd"};
    for (std::size_t n = 0; n < inputs.size(); ++n) {
        const PanopticReport& r = reports[n];
        nlohmann::json j = report_to_json(r);
        j["subject_id"] = inputs[n].subject_id;
        subjects.push_back(j);
        values["binary_dsc"].push_back(r.binary_dsc);
        values["rq"].push_back(r.rq);
        values["sq_dsc"].push_back(r.sq_dsc);
        values["pq_dsc"].push_back(r.pq_dsc);
        if (r.sq_assd) {
            values["sq_assd"].push_back(*r.sq_assd);
            values["pq_assd"].push_back(*r.pq_assd);
        }
    }
    std::ostringstream table;
    table << "schema_version,metric,n,mean,std,summary\n";
    nlohmann::json aggregate = nlohmann::json::object();
    for (const std::string& metric : order) {
        const auto& v = values[metric];
        if (v.empty()) {
            continue;
        }
        double mean = 0.0;
        for (double x : v) {
            mean += x;
        }
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        const double sd = std::sqrt(ss / static_cast<double>(v.size()));
        table << kReportSchemaVersion << ',' << metric << ',' << v.size() << ',' << csv::format_fixed(mean, 3) << ','
              << csv::format_fixed(sd, 3) << ',' << csv::format_fixed(mean, 3) << " +- " << csv::format_fixed(sd, 3) << '\n';
        aggregate[metric] = {{"mean", mean}, {"std", sd}, {"n", v.size()}};
    }
    nlohmann::json out{{"schema_version", kReportSchemaVersion}, {"subjects", subjects}, {"aggregate", aggregate}};
    write_text_file(out_dir / "evaluation.json", out.dump(2) + "\n");
    write_text_file(out_dir / "evaluation.csv", table.str());
    return out;
}

void run_phantom(const nlohmann::json& spec, const fs::path& out_dir)
{
    const PhantomScene scene = build_scene(scene_spec_from_json(spec));
    fs::create_directories(out_dir);
    write_nifti_file(out_dir / "ribs.nii.gz", scene.ribs);
    write_nifti_file(out_dir / "vertebrae.nii.gz", scene.vertebrae);
    write_nifti_file(out_dir / "corpus.nii.gz", scene.corpora);
    nlohmann::json truth = scene.truth_json();
    truth["scene_spec"] = scene_spec_to_json(scene_spec_from_json(spec));
    write_text_file(out_dir / "truth.json", truth.dump(2) + "\n");
}

void write_text_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
}

std::string read_text_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace ribmorph
