#pragma once

// Small deterministic learners used to produce learning curves: ordinary
// least squares, logistic/softmax regression trained by full-batch gradient
// descent, and Lloyd's k-means.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "normetric/errors.hpp"
#include "normetric/eval_metrics.hpp"
#include "normetric/random.hpp"

namespace normetric {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Linear regression

struct LinearModel {
    Vector weights;
    double intercept = 0.0;

    Vector predict(const Matrix& x) const {
        return (x * weights).array() + intercept;
    }
};

inline constexpr double kRidgeFallback = 1e-8;

/// Least squares on centered data. Rank-deficient Gram matrices get a 1e-8
/// ridge term on the weights; the intercept is never penalized.
inline LinearModel fit_linear(const Matrix& x, std::span<const double> y) {
    if (x.rows() == 0 || y.empty()) {
        throw DomainError("fit_linear: empty input");
    }
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ShapeError("fit_linear: row count does not match target length");
    }
    const Eigen::Map<const Vector> target(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const double y_mean = target.mean();
    const Matrix xc = x.rowwise() - x_mean;
    const Vector yc = target.array() - y_mean;

    Matrix gram = xc.transpose() * xc;
    const Vector rhs = xc.transpose() * yc;

    LinearModel model;
    Eigen::FullPivLU<Matrix> lu(gram);
    if (lu.rank() == gram.rows()) {
        model.weights = lu.solve(rhs);
    } else {
        gram.diagonal().array() += kRidgeFallback;
        model.weights = gram.ldlt().solve(rhs);
    }
    model.intercept = y_mean - x_mean.dot(model.weights);
    return model;
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticConfig {
    std::size_t epochs = 500;
    double learning_rate = 0.1;
    std::uint64_t seed = 42;
};

/// Binary models keep a single weight row (probability of class 1);
/// multinomial models keep one row per class.
struct LogisticModel {
    Matrix weights;
    Vector intercepts;
    std::size_t classes = 2;

    bool binary() const { return classes == 2 && weights.rows() == 1; }

    /// N x C matrix of class probabilities.
    Matrix predict_proba(const Matrix& x) const {
        if (binary()) {
            const Vector z = (x * weights.row(0).transpose()).array() + intercepts(0);
            Matrix p(x.rows(), 2);
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const double p1 = 1.0 / (1.0 + std::exp(-z(i)));
                p(i, 0) = 1.0 - p1;
                p(i, 1) = p1;
            }
            return p;
        }
        Matrix z = x * weights.transpose();
        z.rowwise() += intercepts.transpose();
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            const double m = z.row(i).maxCoeff();
            z.row(i) = (z.row(i).array() - m).exp();
            z.row(i) /= z.row(i).sum();
        }
        return z;
    }

    /// Most probable class per row, ties to the lowest class.
    std::vector<Label> predict(const Matrix& x) const {
        const Matrix p = predict_proba(x);
        std::vector<Label> out(static_cast<std::size_t>(p.rows()));
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            Label best = 0;
            for (Eigen::Index j = 1; j < p.cols(); ++j) {
                if (p(i, j) > p(i, static_cast<Eigen::Index>(best))) {
                    best = static_cast<Label>(j);
                }
            }
            out[static_cast<std::size_t>(i)] = best;
        }
        return out;
    }
};

namespace detail {

inline Matrix one_hot(std::span<const Label> y, std::size_t classes) {
    Matrix t = Matrix::Zero(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(classes));
    for (std::size_t i = 0; i < y.size(); ++i) {
        t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y[i])) = 1.0;
    }
    return t;
}

/// Residual (probability minus target) in the layout the model parameters use.
inline Matrix logistic_residual(const LogisticModel& model, const Matrix& x, std::span<const Label> y) {
    const Matrix p = model.predict_proba(x);
    if (model.binary()) {
        Matrix r(x.rows(), 1);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            r(i, 0) = p(i, 1) - (y[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0);
        }
        return r;
    }
    return p - one_hot(y, model.classes);
}

} // namespace detail

/// Mean cross-entropy of the model on (x, y).
inline double logistic_loss(const LogisticModel& model, const Matrix& x, std::span<const Label> y) {
    const Matrix p = model.predict_proba(x);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double pi = p(i, static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]));
        loss -= std::log(std::max(pi, std::numeric_limits<double>::min()));
    }
    return loss / static_cast<double>(p.rows());
}

struct LogisticGradient {
    Matrix weights;
    Vector intercepts;
};

/// Analytic gradient of logistic_loss.
inline LogisticGradient logistic_gradient(const LogisticModel& model, const Matrix& x, std::span<const Label> y) {
    const Matrix r = detail::logistic_residual(model, x, y);
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    return {(r.transpose() * x) * inv_n, r.colwise().sum().transpose() * inv_n};
}

inline LogisticModel fit_logistic(const Matrix& x, std::span<const Label> y, std::size_t classes,
                                  const LogisticConfig& config = {}) {
    if (x.rows() == 0 || static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ShapeError("fit_logistic: row count does not match label count");
    }
    if (classes < 2) {
        throw DomainError("fit_logistic: need at least 2 classes");
    }
    if (config.epochs == 0 || !(config.learning_rate > 0.0)) {
        throw DomainError("fit_logistic: epochs must be >= 1 and learning rate positive");
    }
    std::vector<bool> seen(classes, false);
    std::size_t distinct = 0;
    for (auto label : y) {
        if (label >= classes) {
            throw DomainError("fit_logistic: label out of range");
        }
        if (!seen[label]) {
            seen[label] = true;
            ++distinct;
        }
    }
    if (distinct < 2) {
        throw DegenerateError("fit_logistic: training labels contain a single class");
    }

    const Eigen::Index rows = classes == 2 ? 1 : static_cast<Eigen::Index>(classes);
    LogisticModel model;
    model.classes = classes;
    model.weights.resize(rows, x.cols());
    model.intercepts = Vector::Zero(rows);
    Rng rng(config.seed);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            model.weights(r, c) = 0.01 * standard_normal(rng);
        }
    }

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const LogisticGradient grad = logistic_gradient(model, x, y);
        model.weights -= config.learning_rate * grad.weights;
        model.intercepts -= config.learning_rate * grad.intercepts;
    }
    return model;
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansModel {
    Matrix centroids;
    std::vector<Label> assignments;
    double inertia = 0.0;
    std::size_t iterations = 0;
    /// Inertia after each assignment step.
    std::vector<double> inertia_history;

    std::size_t k() const { return static_cast<std::size_t>(centroids.rows()); }

    /// Nearest centroid per row, ties to the lowest index.
    std::vector<Label> predict(const Matrix& x) const {
        std::vector<Label> out(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            Eigen::Index best = 0;
            (centroids.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
            out[static_cast<std::size_t>(i)] = static_cast<Label>(best);
        }
        return out;
    }

    /// Occupancy of each cluster in the training assignments.
    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sizes(k(), 0);
        for (auto a : assignments) {
            ++sizes[a];
        }
        return sizes;
    }
};

struct KMeansConfig {
    std::size_t k = 2;
    std::size_t max_iters = 300;
    std::uint64_t seed = 42;
};

/// Lloyd's algorithm seeded with k distinct random samples. A cluster that
/// empties is moved onto the sample farthest from its own centroid.
inline KMeansModel fit_kmeans(const Matrix& x, const KMeansConfig& config) {
    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t k = config.k;
    if (k < 2) {
        throw DomainError("fit_kmeans: k must be at least 2");
    }
    if (n < k) {
        throw DomainError("fit_kmeans: fewer samples (" + std::to_string(n) + ") than clusters (" +
                          std::to_string(k) + ")");
    }

    Rng rng(config.seed);
    const auto order = permutation(n, rng);
    KMeansModel model;
    model.centroids.resize(static_cast<Eigen::Index>(k), x.cols());
    for (std::size_t c = 0; c < k; ++c) {
        model.centroids.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(order[c]));
    }

    std::vector<Label> assign(n, std::numeric_limits<Label>::max());
    std::vector<double> dist(n, 0.0);

    auto assign_all = [&]() {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            dist[i] = (model.centroids.rowwise() - x.row(static_cast<Eigen::Index>(i)))
                          .rowwise()
                          .squaredNorm()
                          .minCoeff(&best);
            if (assign[i] != static_cast<Label>(best)) {
                assign[i] = static_cast<Label>(best);
                changed = true;
            }
            inertia += dist[i];
        }
        model.inertia_history.push_back(inertia);
        return changed;
    };

    assign_all();
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        model.iterations = iter + 1;

        Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), x.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(static_cast<Eigen::Index>(assign[i])) += x.row(static_cast<Eigen::Index>(i));
            ++counts[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                model.centroids.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) /
                                                                    static_cast<double>(counts[c]);
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) {
                continue;
            }
            // Farthest point from its current centroid, among clusters that can spare one.
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assign[i]] > 1 && (far == n || dist[i] > dist[far])) {
                    far = i;
                }
            }
            if (far == n) {
                break;
            }
            --counts[assign[far]];
            assign[far] = static_cast<Label>(c);
            counts[c] = 1;
            dist[far] = 0.0;
            model.centroids.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(far));
        }

        if (!assign_all()) {
            break;
        }
    }

    model.assignments = std::move(assign);
    model.inertia = model.inertia_history.back();
    return model;
}

} // namespace normetric
