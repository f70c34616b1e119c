#include "ribmorph/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "ribmorph/csv.hpp"
#include "ribmorph/error.hpp"
#include "ribmorph/parallel.hpp"

namespace ribmorph {

namespace {

void mean_std(const std::vector<double>& values, double& mean, double& std)
{
    mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    std = std::sqrt(ss / static_cast<double>(values.size()));
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
    }
    return out;
}

double run_seed(const FeatureMatrix& matrix, const KernelSpec& kernel, const ExperimentOptions& options, std::uint64_t seed)
{
    const SubjectSplit split = seeded_split(matrix.subject_ids, seed, options.train_fraction);
    const std::set<std::string> train_ids(split.train.begin(), split.train.end());
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> test_rows;
    std::vector<bool> y_train;
    std::vector<bool> y_test;
    for (Eigen::Index r = 0; r < matrix.values.rows(); ++r) {
        const auto ri = static_cast<std::size_t>(r);
        if (train_ids.count(matrix.subject_ids[ri]) != 0) {
            train_rows.push_back(r);
            y_train.push_back(matrix.is_stump[ri]);
        } else {
            test_rows.push_back(r);
            y_test.push_back(matrix.is_stump[ri]);
        }
    }
    std::vector<bool> predicted;
    const auto positives = std::count(y_train.begin(), y_train.end(), true);
    if (positives == 0 || positives == static_cast<long>(y_train.size())) {
        predicted.assign(y_test.size(), positives != 0);
    } else {
        const SvmModel model = train_svm(take_rows(matrix.values, train_rows), y_train, kernel, options.c);
        predicted = predict(model, take_rows(matrix.values, test_rows));
    }
    return f1_score(predicted, y_test);
}

}  // namespace

double f1_score(const std::vector<bool>& predicted, const std::vector<bool>& truth)
{
    if (predicted.size() != truth.size()) {
        throw Error(ErrorCode::DimensionMismatch, "prediction and truth lengths differ");
    }
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        tp += (predicted[i] && truth[i]) ? 1 : 0;
        fp += (predicted[i] && !truth[i]) ? 1 : 0;
        fn += (!predicted[i] && truth[i]) ? 1 : 0;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

SubjectSplit seeded_split(std::vector<std::string> subject_ids, std::uint64_t seed, double train_fraction)
{
    std::sort(subject_ids.begin(), subject_ids.end());
    subject_ids.erase(std::unique(subject_ids.begin(), subject_ids.end()), subject_ids.end());
    const std::size_t n = subject_ids.size();
    if (n < 2) {
        throw Error(ErrorCode::InvalidArgument, "a split needs at least two subjects");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i >= 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(subject_ids[i], subject_ids[j]);
    }
    const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    if (cut == 0 || cut == n) {
        throw Error(ErrorCode::InvalidArgument, "split leaves one side empty");
    }
    SubjectSplit split;
    split.train.assign(subject_ids.begin(), subject_ids.begin() + static_cast<long>(cut));
    split.test.assign(subject_ids.begin() + static_cast<long>(cut), subject_ids.end());
    return split;
}

ExperimentResult run_experiment(const FeatureMatrix& matrix, const KernelSpec& kernel, const ExperimentOptions& options)
{
    if (options.seeds < 1) {
        throw Error(ErrorCode::InvalidArgument, "need at least one seed");
    }
    ExperimentResult result;
    result.feature_set = matrix.feature_set.name();
    result.kernel = kernel;
    for (int s = 0; s < options.seeds; ++s) {
        result.f1.push_back(run_seed(matrix, kernel, options, static_cast<std::uint64_t>(s)));
    }
    mean_std(result.f1, result.mean, result.std);
    return result;
}

std::vector<ExperimentResult> run_table5(const std::vector<RibFeatureRecord>& records, const ExperimentOptions& options)
{
    std::vector<FeatureMatrix> matrices;
    for (const FeatureSet& set : options.feature_sets) {
        std::vector<RibFeatureRecord> usable;
        for (const auto& r : records) {
            if (has_enough_path(r, set)) {
                usable.push_back(r);
            }
        }
        matrices.push_back(build_feature_matrix(std::move(usable), set));
    }
    const std::size_t kernels = options.kernels.size();
    std::vector<ExperimentResult> results(matrices.size() * kernels);
    parallel_for(results.size(), options.jobs, [&](std::size_t i) {
        results[i] = run_experiment(matrices[i / kernels], options.kernels[i % kernels], options);
    });
    return results;
}

std::vector<SweepPoint> threshold_sweep(const std::vector<RibFeatureRecord>& records,
                                        const std::vector<double>& thresholds_mm, const ExperimentOptions& options)
{
    if (options.kernels.empty()) {
        throw Error(ErrorCode::InvalidArgument, "sweep needs a kernel");
    }
    ExperimentOptions single = options;
    single.kernels = {options.kernels.front()};

    std::vector<SweepPoint> points;
    for (double threshold : thresholds_mm) {
        std::vector<RibFeatureRecord> relabeled = records;
        std::size_t stumps = 0;
        for (auto& r : relabeled) {
            r.is_stump = classify_stump(r.length_mm, threshold);
            stumps += r.is_stump ? 1 : 0;
        }
        if (stumps == 0 || stumps == relabeled.size()) {
            for (const FeatureSet& set : options.feature_sets) {
                points.push_back({threshold, set.name(), std::nullopt, std::nullopt});
            }
            continue;
        }
        const std::vector<ExperimentResult> results = run_table5(relabeled, single);
        for (const ExperimentResult& r : results) {
            points.push_back({threshold, r.feature_set, r.mean, r.std});
        }
    }
    return points;
}

void write_table5_csv(std::ostream& out, const std::vector<ExperimentResult>& results)
{
    std::size_t seeds = 0;
    for (const auto& r : results) {
        seeds = std::max(seeds, r.f1.size());
    }
    out << "schema_version,feature_set,kernel";
    for (std::size_t s = 0; s < seeds; ++s) {
        out << ",f1_seed" << s;
    }
    out << ",mean_f1,std_f1,summary\n";
    for (const auto& r : results) {
        out << kResultCsvSchemaVersion << ',' << r.feature_set << ',' << r.kernel.name();
        for (std::size_t s = 0; s < seeds; ++s) {
            out << ',' << (s < r.f1.size() ? csv::format_double(r.f1[s]) : "");
        }
        out << ',' << csv::format_double(r.mean) << ',' << csv::format_double(r.std) << ','
            << csv::format_fixed(r.mean, 2) << " +- " << csv::format_fixed(r.std, 2) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points)
{
    out << "schema_version,threshold_mm,feature_set,mean_f1,std_f1,reference_line\n";
    for (const auto& p : points) {
        out << kResultCsvSchemaVersion << ',' << csv::format_double(p.threshold_mm) << ',' << p.feature_set << ','
            << (p.mean_f1 ? csv::format_double(*p.mean_f1) : "") << ','
            << (p.std_f1 ? csv::format_double(*p.std_f1) : "") << ','
            << (p.threshold_mm == kStumpRibThresholdMm ? 1 : 0) << '\n';
    }
}

}  // namespace ribmorph
