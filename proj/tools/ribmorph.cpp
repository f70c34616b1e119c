#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ribmorph/classify.hpp"
#include "ribmorph/error.hpp"
#include "ribmorph/nifti.hpp"
#include "ribmorph/pipeline.hpp"
#include "ribmorph/snapshot.hpp"

namespace fs = std::filesystem;
using namespace ribmorph;

namespace {

constexpr int kExitError = 1;
constexpr int kExitRibErrors = 3;

struct AnalyzeArgs {
    std::string ribs;
    std::string vertebrae;
    std::string corpus;
    std::string manifest;
    std::string subject_id = "subject";
    std::string out;
    std::vector<double> superior_hint;
    AnalyzeOptions options;
};

struct SnapshotArgs {
    std::vector<std::string> volumes;
    std::vector<std::string> paths;
    std::string plane = "coronal";
    std::string out;
};

struct EvaluateArgs {
    std::string pred;
    std::string ref;
    std::string manifest;
    std::string subject_id = "subject";
    std::string out;
    int jobs = 1;
};

struct ExperimentArgs {
    std::string features;
    std::string mode = "table5";
    std::string out;
    std::string kernel = "linear";
    std::vector<std::string> feature_sets;
    std::vector<double> thresholds;
    ExperimentOptions options;
};

struct PhantomArgs {
    std::string spec;
    std::string out;
};

int cmd_analyze(const AnalyzeArgs& a)
{
    std::vector<SubjectInput> subjects;
    if (!a.manifest.empty()) {
        subjects = read_manifest(a.manifest);
    } else {
        if (a.ribs.empty() || a.vertebrae.empty()) {
            throw Error(ErrorCode::InvalidArgument, "analyze needs --ribs and --vertebrae, or --manifest");
        }
        SubjectInput s{a.subject_id, a.ribs, a.vertebrae, std::nullopt};
        if (!a.corpus.empty()) {
            s.corpus = a.corpus;
        }
        subjects.push_back(s);
    }
    AnalyzeOptions options = a.options;
    if (!a.superior_hint.empty()) {
        options.superior_hint = Vec3(a.superior_hint[0], a.superior_hint[1], a.superior_hint[2]);
    }
    const AnalyzeSummary summary = run_analyze(subjects, a.out, options);
    for (const auto& s : summary.summary.at("per_subject")) {
        std::cout << s.at("subject_id").get<std::string>() << ": " << s.at("status").get<std::string>() << '\n';
        if (s.contains("error")) {
            std::cerr << "error: " << s.at("error").get<std::string>() << '\n';
        }
    }
    std::cout << "measured ribs: " << summary.summary.at("measured_ribs") << ", stump ribs: "
              << summary.summary.at("stump_ribs") << '\n';
    for (const auto& s : summary.summary.at("per_subject")) {
        if (s.at("status") == "failed") {
            return kExitError;
        }
    }
    return summary.errors ? kExitRibErrors : 0;
}

int cmd_snapshot(const SnapshotArgs& a)
{
    const Plane plane = plane_from_string(a.plane);
    std::optional<LabelVolume> combined;
    for (const std::string& path : a.volumes) {
        LabelVolume vol = read_nifti_file(path);
        if (!combined) {
            combined = std::move(vol);
            continue;
        }
        if (!combined->same_grid(vol)) {
            throw Error(ErrorCode::GridMismatch, path + " does not share the first volume's grid");
        }
        std::vector<Label> data(combined->data().begin(), combined->data().end());
        for (std::size_t n = 0; n < data.size(); ++n) {
            data[n] = std::max(data[n], vol[n]);
        }
        combined = combined->with_data(std::move(data));
    }
    std::vector<WorldPoint> markers;
    for (const std::string& path : a.paths) {
        const auto report = nlohmann::json::parse(read_text_file(path));
        for (const auto& rib : report.at("ribs")) {
            if (!rib.contains("path")) {
                continue;
            }
            for (const auto& p : rib.at("path").at("points_mm")) {
                markers.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
            }
        }
    }
    const auto bytes = encode_ppm(project(*combined, plane, markers));
    std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + a.out);
    }
    return 0;
}

int cmd_evaluate(const EvaluateArgs& a)
{
    std::vector<EvaluationInput> inputs;
    if (!a.manifest.empty()) {
        inputs = read_evaluation_manifest(a.manifest);
    } else {
        if (a.pred.empty() || a.ref.empty()) {
            throw Error(ErrorCode::InvalidArgument, "evaluate needs --pred and --ref, or --manifest");
        }
        inputs.push_back({a.subject_id, a.pred, a.ref});
    }
    const auto result = run_evaluate(inputs, a.out, a.jobs);
    std::cout << read_text_file(fs::path(a.out) / "evaluation.csv");
    return 0;
}

int cmd_experiment(const ExperimentArgs& a)
{
    std::ifstream in(a.features, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + a.features);
    }
    const auto records = read_feature_csv(in);
    ExperimentOptions options = a.options;
    if (!a.feature_sets.empty()) {
        options.feature_sets.clear();
        for (const auto& name : a.feature_sets) {
            options.feature_sets.push_back(parse_feature_set(name));
        }
    }
    std::ostringstream out;
    if (a.mode == "table5") {
        const auto results = run_table5(records, options);
        write_table5_csv(out, results);
    } else if (a.mode == "sweep") {
        if (a.kernel == "linear") {
            options.kernels = {KernelSpec::linear()};
        } else if (a.kernel == "polynomial") {
            options.kernels = {KernelSpec::polynomial()};
        } else {
            throw Error(ErrorCode::InvalidArgument, "kernel must be linear or polynomial");
        }
        std::vector<double> thresholds = a.thresholds;
        if (thresholds.empty()) {
            for (double t = 10.0; t <= 250.0; t += 10.0) {
                thresholds.push_back(t);
            }
            thresholds.push_back(kStumpRibThresholdMm);
            std::sort(thresholds.begin(), thresholds.end());
        }
        write_sweep_csv(out, threshold_sweep(records, thresholds, options));
    } else {
        throw Error(ErrorCode::InvalidArgument, "mode must be table5 or sweep");
    }
    write_text_file(a.out, out.str());
    std::cout << out.str();
    return 0;
}

int cmd_phantom(const PhantomArgs& a)
{
    nlohmann::json spec;
    try {
        spec = nlohmann::json::parse(read_text_file(a.spec));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("phantom spec: ") + e.what());
    }
    run_phantom(spec, a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Rib morphology toolkit: rib length, stump ribs, shape features, evaluation"};
    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "Assign, measure and describe ribs of one or more subjects");
    an->add_option("--ribs", analyze.ribs, "Rib mask (NIfTI)")->check(CLI::ExistingFile);
    an->add_option("--vertebrae", analyze.vertebrae, "Vertebra instance mask (NIfTI)")->check(CLI::ExistingFile);
    an->add_option("--corpus", analyze.corpus, "Vertebral body mask (NIfTI)")->check(CLI::ExistingFile);
    an->add_option("--subject-id", analyze.subject_id, "Subject id for single-subject runs");
    an->add_option("--manifest", analyze.manifest, "CSV: subject_id,ribs,vertebrae[,corpus]")->check(CLI::ExistingFile);
    an->add_option("--out", analyze.out, "Output directory")->required();
    an->add_option("--threshold", analyze.options.stump_threshold_mm, "Stump rib length threshold in mm")
        ->check(CLI::PositiveNumber);
    an->add_flag("--lowest-two", analyze.options.lowest_two, "Measure only the two lowest rib-bearing levels");
    an->add_option("--superior-hint", analyze.superior_hint, "World superior direction x y z")->expected(3);
    an->add_option("--jobs", analyze.options.jobs, "Parallel subjects")->check(CLI::PositiveNumber);
    auto& rlma = analyze.options.rlma;
    an->add_option("--shell-min", rlma.shell_min_mm, "Candidate shell inner radius (mm)");
    an->add_option("--shell-max", rlma.shell_max_mm, "Candidate shell outer radius (mm)");
    an->add_option("--step-fraction", rlma.step_fraction, "Fraction of the way to the candidate mean");
    an->add_option("--start-refine-radius", rlma.start_refine_radius_mm, "Start point averaging radius (mm)");
    an->add_option("--cone-half-angle", rlma.cone_half_angle_deg, "Terminal cone half angle (degrees)");
    an->add_option("--cone-rays", rlma.cone_ray_count, "Terminal cone ray count");
    an->add_option("--cone-length", rlma.cone_max_len_mm, "Terminal ray reach (mm)");
    an->add_option("--ray-step", rlma.ray_step_mm, "Terminal ray sampling step (mm)");
    an->add_option("--resample", rlma.resample_mm, "Isotropic resampling spacing (mm)");
    an->add_option("--crop-margin", rlma.crop_margin_mm, "Crop margin before resampling (mm)");
    an->add_option("--max-iterations", rlma.max_iterations, "Path step cap");

    SnapshotArgs snapshot;
    auto* sn = app.add_subcommand("snapshot", "Maximum-label projection to a PPM image");
    sn->add_option("--volume", snapshot.volumes, "Label volumes, combined by maximum label")
        ->required()
        ->check(CLI::ExistingFile);
    sn->add_option("--plane", snapshot.plane, "coronal or sagittal");
    sn->add_option("--paths", snapshot.paths, "Subject reports whose path points are overlaid")->check(CLI::ExistingFile);
    sn->add_option("--out", snapshot.out, "Output .ppm")->required();

    EvaluateArgs evaluate;
    auto* ev = app.add_subcommand("evaluate", "Binary DSC and panoptic metrics of predicted rib instances");
    ev->add_option("--pred", evaluate.pred, "Predicted instance mask")->check(CLI::ExistingFile);
    ev->add_option("--ref", evaluate.ref, "Reference instance mask")->check(CLI::ExistingFile);
    ev->add_option("--subject-id", evaluate.subject_id, "Subject id for single-pair runs");
    ev->add_option("--manifest", evaluate.manifest, "CSV: subject_id,prediction,reference")->check(CLI::ExistingFile);
    ev->add_option("--out", evaluate.out, "Output directory")->required();
    ev->add_option("--jobs", evaluate.jobs, "Parallel subjects")->check(CLI::PositiveNumber);

    ExperimentArgs experiment;
    auto* ex = app.add_subcommand("experiment", "SVM stump classification on a feature CSV");
    ex->add_option("--features", experiment.features, "Feature CSV written by analyze")->required()->check(CLI::ExistingFile);
    ex->add_option("--mode", experiment.mode, "table5 or sweep");
    ex->add_option("--out", experiment.out, "Result CSV")->required();
    ex->add_option("--seeds", experiment.options.seeds, "Number of seeded splits")->check(CLI::PositiveNumber);
    ex->add_option("--c", experiment.options.c, "SVM regularisation constant")->check(CLI::PositiveNumber);
    ex->add_option("--kernel", experiment.kernel, "Sweep kernel: linear or polynomial");
    ex->add_option("--feature-set", experiment.feature_sets, "e.g. 2-PPR, DRC, \"4-PPR and DRC\"");
    ex->add_option("--thresholds", experiment.thresholds, "Sweep thresholds in mm");
    ex->add_option("--jobs", experiment.options.jobs, "Parallel runs")->check(CLI::PositiveNumber);

    PhantomArgs phantom;
    auto* ph = app.add_subcommand("phantom", "Generate a synthetic rib scene with ground truth");
    ph->add_option("--spec", phantom.spec, "Scene spec JSON")->required()->check(CLI::ExistingFile);
    ph->add_option("--out", phantom.out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (an->parsed()) {
            return cmd_analyze(analyze);
        }
        if (sn->parsed()) {
            return cmd_snapshot(snapshot);
        }
        if (ev->parsed()) {
            return cmd_evaluate(evaluate);
        }
        if (ex->parsed()) {
            return cmd_experiment(experiment);
        }
        if (ph->parsed()) {
            return cmd_phantom(phantom);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
