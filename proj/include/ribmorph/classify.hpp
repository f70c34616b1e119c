#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ribmorph/features.hpp"
#include "ribmorph/svm.hpp"

namespace ribmorph {

/// 2tp / (2tp + fp + fn) with stump as the positive class; 0 when undefined.
double f1_score(const std::vector<bool>& predicted, const std::vector<bool>& truth);

struct SubjectSplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

/**
 * Subject-wise split. The sorted unique ids are shuffled with a
 * Fisher-Yates pass (j = rng() % (i + 1), i from n-1 down to 1) driven by
 * std::mt19937_64 seeded with `seed`; the first floor(fraction * n) go to
 * training. Throws InvalidArgument for fewer than two subjects or an empty side.
 */
SubjectSplit seeded_split(std::vector<std::string> subject_ids, std::uint64_t seed, double train_fraction = 0.7);

struct ExperimentOptions {
    std::vector<FeatureSet> feature_sets = table5_feature_sets();
    std::vector<KernelSpec> kernels = {KernelSpec::polynomial(), KernelSpec::linear()};
    int seeds = 10;
    double c = 1.0;
    double train_fraction = 0.7;
    int jobs = 1;
};

struct ExperimentResult {
    std::string feature_set;
    KernelSpec kernel;
    std::vector<double> f1;
    double mean = 0.0;
    /// Population standard deviation.
    double std = 0.0;
};

/// Seeds 0..seeds-1 on one feature matrix. A training split holding a single
/// class predicts that class for every test row.
ExperimentResult run_experiment(const FeatureMatrix& matrix, const KernelSpec& kernel, const ExperimentOptions& options);

/// One result per (feature set, kernel), feature-set major.
std::vector<ExperimentResult> run_table5(const std::vector<RibFeatureRecord>& records,
                                         const ExperimentOptions& options = {});

struct SweepPoint {
    double threshold_mm = 0.0;
    std::string feature_set;
    /// Absent when the threshold leaves a single class.
    std::optional<double> mean_f1;
    std::optional<double> std_f1;
};

/// Relabels stumps as length <= threshold and reruns the seeded experiment
/// for every set with options.kernels.front().
std::vector<SweepPoint> threshold_sweep(const std::vector<RibFeatureRecord>& records,
                                        const std::vector<double>& thresholds_mm,
                                        const ExperimentOptions& options);

inline constexpr int kResultCsvSchemaVersion = 1;

void write_table5_csv(std::ostream& out, const std::vector<ExperimentResult>& results);
/// The row at the stump threshold carries reference_line = 1.
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace ribmorph
