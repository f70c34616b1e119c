#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ribmorph/classify.hpp"
#include "ribmorph/features.hpp"
#include "ribmorph/metrics.hpp"

namespace ribmorph {

inline constexpr int kReportSchemaVersion = 1;

struct AnalyzeOptions {
    RlmaConfig rlma;
    double stump_threshold_mm = kStumpRibThresholdMm;
    /// Only measure ribs of the two lowest rib-bearing vertebrae (largest labels).
    bool lowest_two = false;
    std::optional<Vec3> superior_hint;
    int jobs = 1;
};

struct RibResult {
    RibInstance instance;
    std::optional<PathPolyline> path;
    std::optional<RibFeatureRecord> features;
    bool skipped = false;
    std::optional<std::string> error;
};

struct SubjectAnalysis {
    std::string subject_id;
    std::vector<VertebraInstance> vertebrae;
    std::vector<RibResult> ribs;
    LabelVolume instances;
    std::vector<std::string> notes;

    bool has_errors() const;
    std::vector<RibFeatureRecord> feature_records() const;
    nlohmann::json to_json(const AnalyzeOptions& options) const;
};

/**
 * Component labelling, rib-to-vertebra assignment, RLMA and features for one
 * subject. Throws GridMismatch unless all volumes share a grid within 1e-3 mm.
 * An empty rib mask gives an analysis without ribs.
 */
SubjectAnalysis analyze_subject(const std::string& subject_id, const LabelVolume& ribs,
                                const LabelVolume& vertebrae, const LabelVolume* corpora,
                                const AnalyzeOptions& options);

struct SubjectInput {
    std::string subject_id;
    std::filesystem::path ribs;
    std::filesystem::path vertebrae;
    std::optional<std::filesystem::path> corpus;
};

/// CSV with header subject_id,ribs,vertebrae[,corpus]; relative paths resolve
/// against the manifest's directory.
std::vector<SubjectInput> read_manifest(const std::filesystem::path& manifest);

struct AnalyzeSummary {
    nlohmann::json summary;
    bool errors = false;
};

/// Runs every subject (up to `jobs` at once) and writes <id>.json,
/// <id>_instances.nii.gz, features.csv and summary.json into `out_dir`.
AnalyzeSummary run_analyze(const std::vector<SubjectInput>& subjects, const std::filesystem::path& out_dir,
                           const AnalyzeOptions& options);

struct EvaluationInput {
    std::string subject_id;
    std::filesystem::path prediction;
    std::filesystem::path reference;
};

/// Writes evaluation.json (per-subject reports) and evaluation.csv (mean and
/// std per metric, 3 decimals) into `out_dir`.
nlohmann::json run_evaluate(const std::vector<EvaluationInput>& inputs, const std::filesystem::path& out_dir, int jobs);

std::vector<EvaluationInput> read_evaluation_manifest(const std::filesystem::path& manifest);

/// Writes ribs.nii.gz, vertebrae.nii.gz, corpus.nii.gz and truth.json.
void run_phantom(const nlohmann::json& spec, const std::filesystem::path& out_dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace ribmorph
