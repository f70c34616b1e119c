#include "ribmorph/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ribmorph/error.hpp"

namespace ribmorph {

namespace {

constexpr double kTau = 1e-12;

double kernel_value(const KernelSpec& k, double gamma, double dot)
{
    if (k.kind == KernelKind::Linear) {
        return dot;
    }
    return std::pow(gamma * dot + k.coef0, k.degree);
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& scale)
{
    return (x.rowwise() - mean).array().rowwise() / scale.array();
}

}  // namespace

std::string KernelSpec::name() const
{
    return kind == KernelKind::Linear ? "linear" : "polynomial";
}

SvmModel train_svm(const Eigen::MatrixXd& x, const std::vector<bool>& labels, const KernelSpec& kernel, double c)
{
    const auto l = static_cast<int>(x.rows());
    if (static_cast<std::size_t>(l) != labels.size()) {
        throw Error(ErrorCode::DimensionMismatch, "label count does not match rows");
    }
    if (x.cols() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "no feature columns");
    }
    if (kernel.kind == KernelKind::Polynomial && kernel.degree < 1) {
        throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 1");
    }
    if (!(c > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "C must be positive");
    }
    const auto positives = std::count(labels.begin(), labels.end(), true);
    if (positives == 0 || positives == l) {
        throw Error(ErrorCode::SingleClass, "training data has a single class");
    }

    SvmModel model;
    model.kernel = kernel;
    model.gamma = kernel.gamma.value_or(1.0 / static_cast<double>(x.cols()));
    model.mean = x.colwise().mean();
    model.scale = ((x.rowwise() - model.mean).array().square().colwise().mean()).sqrt();
    for (Eigen::Index j = 0; j < model.scale.size(); ++j) {
        if (!(model.scale[j] > 0.0)) {
            model.scale[j] = 1.0;
        }
    }
    const Eigen::MatrixXd z = standardize(x, model.mean, model.scale);

    Eigen::VectorXd y(l);
    for (int i = 0; i < l; ++i) {
        y[i] = labels[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
    }
    const Eigen::MatrixXd dots = z * z.transpose();
    Eigen::MatrixXd q(l, l);
    for (int i = 0; i < l; ++i) {
        for (int j = 0; j < l; ++j) {
            q(i, j) = y[i] * y[j] * kernel_value(kernel, model.gamma, dots(i, j));
        }
    }

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(l);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(l, -1.0);
    auto is_upper = [&](int t) { return alpha[t] >= c; };
    auto is_lower = [&](int t) { return alpha[t] <= 0.0; };

    const int max_iterations = std::max(10000000, 100 * l);
    int iter = 0;
    double gap = 0.0;
    for (; iter < max_iterations; ++iter) {
        double g_max = -std::numeric_limits<double>::infinity();
        int i = -1;
        for (int t = 0; t < l; ++t) {
            if (y[t] > 0.0 ? !is_upper(t) : !is_lower(t)) {
                const double v = -y[t] * grad[t];
                if (v >= g_max) {
                    g_max = v;
                    i = t;
                }
            }
        }
        double g_max2 = -std::numeric_limits<double>::infinity();
        int j = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int t = 0; t < l; ++t) {
            if (y[t] > 0.0 ? !is_lower(t) : !is_upper(t)) {
                const double v = y[t] * grad[t];
                g_max2 = std::max(g_max2, v);
                const double b = g_max + v;
                if (i >= 0 && b > 0.0) {
                    double a = q(i, i) + q(t, t) - 2.0 * y[i] * y[t] * q(i, t);
                    if (a <= 0.0) {
                        a = kTau;
                    }
                    const double obj = -(b * b) / a;
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        gap = g_max + g_max2;
        if (gap < kSvmTolerance || i < 0 || j < 0) {
            break;
        }

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        grad += q.col(i) * (alpha[i] - old_i) + q.col(j) * (alpha[j] - old_j);
    }
    model.kkt_gap = gap;
    model.iterations = iter;

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int free_count = 0;
    for (int t = 0; t < l; ++t) {
        const double yg = y[t] * grad[t];
        if (is_upper(t)) {
            if (y[t] < 0.0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (is_lower(t)) {
            if (y[t] > 0.0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++free_count;
            sum_free += yg;
        }
    }
    const double rho = free_count > 0 ? sum_free / free_count : 0.5 * (ub + lb);
    model.bias = -rho;

    std::vector<int> support;
    for (int t = 0; t < l; ++t) {
        if (alpha[t] > 0.0) {
            support.push_back(t);
        }
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(support.size()), z.cols());
    model.dual_coef.resize(static_cast<Eigen::Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s) {
        model.support_vectors.row(static_cast<Eigen::Index>(s)) = z.row(support[s]);
        model.dual_coef[static_cast<Eigen::Index>(s)] = alpha[support[s]] * y[support[s]];
    }
    return model;
}

Eigen::VectorXd decision_function(const SvmModel& model, const Eigen::MatrixXd& x)
{
    if (static_cast<std::size_t>(x.cols()) != model.feature_count()) {
        throw Error(ErrorCode::DimensionMismatch, "feature count differs from training");
    }
    const Eigen::MatrixXd z = standardize(x, model.mean, model.scale);
    const Eigen::MatrixXd dots = z * model.support_vectors.transpose();
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        double f = model.bias;
        for (Eigen::Index s = 0; s < dots.cols(); ++s) {
            f += model.dual_coef[s] * kernel_value(model.kernel, model.gamma, dots(r, s));
        }
        out[r] = f;
    }
    return out;
}

std::vector<bool> predict(const SvmModel& model, const Eigen::MatrixXd& x)
{
    const Eigen::VectorXd f = decision_function(model, x);
    std::vector<bool> out(static_cast<std::size_t>(f.size()));
    for (Eigen::Index r = 0; r < f.size(); ++r) {
        out[static_cast<std::size_t>(r)] = f[r] > 0.0;
    }
    return out;
}

}  // namespace ribmorph
