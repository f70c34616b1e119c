#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ribmorph {

enum class KernelKind { Linear, Polynomial };

struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    int degree = 5;
    double coef0 = 1.0;
    /// Defaults to 1 / number of features when unset.
    std::optional<double> gamma;

    static KernelSpec linear() { return {}; }
    static KernelSpec polynomial(int degree = 5, double coef0 = 1.0) { return {KernelKind::Polynomial, degree, coef0, {}}; }

    std::string name() const;
};

struct SvmModel {
    KernelSpec kernel;
    double gamma = 1.0;
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;
    /// Standardized support vectors, one per row.
    Eigen::MatrixXd support_vectors;
    /// alpha_i * y_i per support vector.
    Eigen::VectorXd dual_coef;
    double bias = 0.0;
    /// Maximal KKT violation at termination.
    double kkt_gap = 0.0;
    int iterations = 0;

    std::size_t feature_count() const { return static_cast<std::size_t>(mean.size()); }
};

inline constexpr double kSvmTolerance = 1e-3;

/**
 * Soft-margin C-SVC. Columns are standardized with the training mean and
 * population std (constant columns keep scale 1). Labels are true for the
 * positive class. The dual is solved by SMO with second-order working set
 * selection until the maximal KKT violation drops below 1e-3.
 * Throws SingleClass when only one label is present.
 */
SvmModel train_svm(const Eigen::MatrixXd& x, const std::vector<bool>& y, const KernelSpec& kernel, double c = 1.0);

/// Throws DimensionMismatch when the column count differs from training.
Eigen::VectorXd decision_function(const SvmModel& model, const Eigen::MatrixXd& x);

/// Positive where the decision value is > 0.
std::vector<bool> predict(const SvmModel& model, const Eigen::MatrixXd& x);

}  // namespace ribmorph
