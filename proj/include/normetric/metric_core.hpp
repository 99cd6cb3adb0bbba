#pragma once

// Factors of the dataset-adaptive normalized metric and their composition:
//
//   normalized = min(1, base * f(d, N) * g(SNR) / h(imbalance))
//
// f boosts results obtained with fewer than 20 samples per feature, g rewards
// a clean signal, h penalizes skewed class or cluster sizes. All logarithms
// in the imbalance terms are base 10. Infinite SNR values are represented by
// IEEE infinities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "normetric/errors.hpp"
#include "normetric/eval_metrics.hpp"

namespace normetric {

enum class TaskKind { BinaryClassification, MulticlassClassification, Regression, Clustering };

inline std::string_view to_string(TaskKind task) {
    switch (task) {
    case TaskKind::BinaryClassification:
        return "binary";
    case TaskKind::MulticlassClassification:
        return "multiclass";
    case TaskKind::Regression:
        return "regression";
    case TaskKind::Clustering:
        return "clustering";
    }
    return "unknown";
}

inline TaskKind parse_task(std::string_view name) {
    if (name == "binary") return TaskKind::BinaryClassification;
    if (name == "multiclass") return TaskKind::MulticlassClassification;
    if (name == "regression") return TaskKind::Regression;
    if (name == "clustering") return TaskKind::Clustering;
    throw ConfigError("unknown task '" + std::string(name) + "'");
}

inline bool has_class_targets(TaskKind task) { return task != TaskKind::Regression; }

/// Everything one evaluation needs.
///
/// For every task except regression, `y_true` and `y_pred` hold class (or
/// cluster) indices stored as integral doubles. `y_prob` is the binary
/// probability of the predicted class; `class_probabilities` holds one
/// distribution per sample for multiclass. `group_sizes` are training-split
/// class (or cluster) counts; when empty they are counted from the labels.
struct EvaluationBundle {
    TaskKind task = TaskKind::BinaryClassification;
    std::vector<double> y_true;
    std::vector<double> y_pred;
    std::vector<double> y_prob;
    std::vector<std::vector<double>> class_probabilities;
    std::size_t d = 0;
    std::size_t n_train = 0;
    std::optional<double> base_metric;
    std::vector<std::size_t> group_sizes;
};

struct MetricBreakdown {
    double base = 0.0;
    double dim_factor_f = 1.0;
    double snr_db = 0.0;
    double snr_normalized = 0.0;
    double snr_factor_g = 1.0;
    /// CI for binary, ACIR for multiclass and clustering, 1.0 for regression.
    double imbalance_ratio = 1.0;
    double imbalance_factor_h = 1.0;
    double normalized = 0.0;
};

inline constexpr double kProbabilitySumTolerance = 1e-6;

// ---------------------------------------------------------------------------
// Dimensionality

/// 1 + max(0, sigmoid(d / (0.05 n) - 1) - 1/2).
///
/// Exactly 1 whenever n >= 20 d; approaches 1.5 as features outnumber samples.
inline double dimensionality_factor(std::size_t d, std::size_t n) {
    if (d == 0 || n == 0) {
        throw DomainError("dimensionality_factor: d and n must be positive");
    }
    // d / (0.05 n) written as 20 d / n so that n = 20 d gives exactly 1.
    const double ratio = 20.0 * static_cast<double>(d) / static_cast<double>(n);
    const double sigmoid = 1.0 / (1.0 + std::exp(-(ratio - 1.0)));
    return 1.0 + std::max(0.0, sigmoid - 0.5);
}

// ---------------------------------------------------------------------------
// Imbalance

namespace detail {

inline void require_positive_counts(std::span<const std::size_t> sizes, const char* what) {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) {
            throw DegenerateError(std::string(what) + ": group " + std::to_string(i) + " is empty");
        }
    }
}

} // namespace detail

/// Majority count over minority count for a two-class problem.
inline double class_imbalance_ratio(std::span<const std::size_t> class_sizes) {
    if (class_sizes.size() != 2) {
        throw ShapeError("class_imbalance_ratio: expected 2 classes, got " +
                         std::to_string(class_sizes.size()));
    }
    detail::require_positive_counts(class_sizes, "class_imbalance_ratio");
    const auto [lo, hi] = std::minmax(class_sizes[0], class_sizes[1]);
    return static_cast<double>(hi) / static_cast<double>(lo);
}

/// h(CI) = 1 + log10(CI).
inline double imbalance_adjustment_binary(double ci) {
    if (!(ci >= 1.0) || std::isinf(ci)) {
        throw DomainError("imbalance_adjustment_binary: CI must be finite and >= 1");
    }
    return 1.0 + std::log10(ci);
}

/// Mean over classes of (class size / majority size); 1 when balanced.
inline double average_class_imbalance_ratio(std::span<const std::size_t> class_sizes) {
    if (class_sizes.size() < 2) {
        throw ShapeError("average_class_imbalance_ratio: need at least 2 classes");
    }
    detail::require_positive_counts(class_sizes, "average_class_imbalance_ratio");
    const double majority = static_cast<double>(*std::max_element(class_sizes.begin(), class_sizes.end()));
    double sum = 0.0;
    for (auto s : class_sizes) {
        sum += static_cast<double>(s) / majority;
    }
    return sum / static_cast<double>(class_sizes.size());
}

/// h(ACIR) = 1 + log10(1 / ACIR).
inline double imbalance_adjustment_multiclass(double acir) {
    if (!(acir > 0.0 && acir <= 1.0)) {
        throw DomainError("imbalance_adjustment_multiclass: ACIR must lie in (0, 1]");
    }
    return 1.0 + std::log10(1.0 / acir);
}

/// Cluster-size penalty: ACIR over cluster sizes, then the reciprocal log form,
/// so that uneven clusterings are penalized (h > 1).
inline double cluster_imbalance_adjustment(std::span<const std::size_t> cluster_sizes) {
    return imbalance_adjustment_multiclass(average_class_imbalance_ratio(cluster_sizes));
}

// ---------------------------------------------------------------------------
// Signal-to-noise

namespace detail {

/// 10 log10(signal / noise) extended to the zero cases.
inline double decibels(double signal, double noise, const char* what) {
    if (signal == 0.0 && noise == 0.0) {
        throw UndefinedError(std::string(what) + ": signal and noise are both zero");
    }
    if (noise == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    if (signal == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(signal / noise);
}

} // namespace detail

/// 10 log10(sum y^2 / sum (y_pred - y)^2); +inf for a perfect fit.
inline double snr_regression(std::span<const double> y_true, std::span<const double> y_pred) {
    detail::require_same_nonempty(y_true, y_pred, "snr_regression");
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        signal += y_true[i] * y_true[i];
        const double r = y_pred[i] - y_true[i];
        noise += r * r;
    }
    if (signal == 0.0) {
        throw UndefinedError("snr_regression: true values are all zero");
    }
    return detail::decibels(signal, noise, "snr_regression");
}

/// Signal = number of correct predictions, noise = sum (1 - p)^2 where p is
/// the probability the model gave its predicted class.
inline double snr_binary(std::span<const Label> y_true, std::span<const Label> y_pred,
                         std::span<const double> y_prob) {
    detail::require_same_nonempty(y_true, y_pred, "snr_binary");
    if (y_prob.size() != y_true.size()) {
        throw ShapeError("snr_binary: probability count does not match sample count");
    }
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double p = y_prob[i];
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError("snr_binary: probability at index " + std::to_string(i) + " outside [0, 1]");
        }
        signal += (y_true[i] == y_pred[i]) ? 1.0 : 0.0;
        noise += (1.0 - p) * (1.0 - p);
    }
    return detail::decibels(signal, noise, "snr_binary");
}

/// Index of the largest entry; ties go to the lowest index.
inline Label argmax(std::span<const double> row) {
    Label best = 0;
    for (std::size_t j = 1; j < row.size(); ++j) {
        if (row[j] > row[best]) {
            best = j;
        }
    }
    return best;
}

/// Signal = sum of squared confusion-matrix diagonal (predictions are argmax
/// of each row); noise = squared distance of every row to the one-hot vector
/// of its true class.
inline double snr_multiclass(std::span<const Label> y_true,
                             std::span<const std::vector<double>> probabilities) {
    if (y_true.size() != probabilities.size()) {
        throw ShapeError("snr_multiclass: probability row count does not match sample count");
    }
    if (y_true.empty()) {
        throw DomainError("snr_multiclass: empty input");
    }
    const std::size_t classes = probabilities.front().size();
    if (classes < 2) {
        throw ShapeError("snr_multiclass: need at least 2 classes");
    }

    std::vector<Label> predicted(y_true.size());
    double noise = 0.0;
    for (std::size_t k = 0; k < y_true.size(); ++k) {
        const auto& row = probabilities[k];
        if (row.size() != classes) {
            throw ShapeError("snr_multiclass: row " + std::to_string(k) + " has " +
                             std::to_string(row.size()) + " entries, expected " + std::to_string(classes));
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < classes; ++j) {
            if (!(row[j] >= 0.0 && row[j] <= 1.0)) {
                throw DomainError("snr_multiclass: probability outside [0, 1] in row " + std::to_string(k));
            }
            sum += row[j];
        }
        if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
            throw DomainError("snr_multiclass: row " + std::to_string(k) + " does not sum to 1");
        }
        if (y_true[k] >= classes) {
            throw DomainError("snr_multiclass: true label out of range at index " + std::to_string(k));
        }
        for (std::size_t j = 0; j < classes; ++j) {
            const double ideal = (j == y_true[k]) ? 1.0 : 0.0;
            noise += (row[j] - ideal) * (row[j] - ideal);
        }
        predicted[k] = argmax(row);
    }

    const ConfusionMatrix cm = confusion_matrix(y_true, predicted, classes);
    double signal = 0.0;
    for (std::size_t i = 0; i < classes; ++i) {
        const double tp = static_cast<double>(cm.true_positives(i));
        signal += tp * tp;
    }
    return detail::decibels(signal, noise, "snr_multiclass");
}

/// Piecewise map of decibels onto [0, 0.5] along the quality bands
/// 0-10, 10-15, 15-25, 25-40 and 40+ dB.
///
/// Negative values map to 0. The 25-40 dB branch starts at 0.5 and rises
/// above it, so the result is clamped to 0.5.
inline double normalize_snr(double x) {
    if (std::isnan(x)) {
        throw DomainError("normalize_snr: NaN input");
    }
    double v = 0.0;
    if (x < 0.0) {
        v = 0.0;
    } else if (x < 10.0) {
        v = 0.125 + 0.125 * (x - 0.0) / 10.0;
    } else if (x < 15.0) {
        v = 0.25 + 0.125 * (x - 10.0) / 5.0;
    } else if (x < 25.0) {
        v = 0.375 + 0.125 * (x - 15.0) / 10.0;
    } else if (x < 40.0) {
        v = 0.5 + 0.125 * (x - 25.0) / 15.0;
    } else {
        v = 0.5;
    }
    return std::clamp(v, 0.0, 0.5);
}

/// g(SNR) = 1 + normalized SNR.
inline double snr_adjustment(double snr_normalized) {
    if (!(snr_normalized >= 0.0 && snr_normalized <= 0.5)) {
        throw DomainError("snr_adjustment: normalized SNR must lie in [0, 0.5]");
    }
    return 1.0 + snr_normalized;
}

// ---------------------------------------------------------------------------
// Composition

inline double compose_normalized_metric(double base, double f, double g, double h) {
    if (!(base >= 0.0 && base <= 1.0)) {
        throw DomainError("compose_normalized_metric: base metric must lie in [0, 1]");
    }
    if (!(f >= 1.0) || !(g >= 1.0)) {
        throw DomainError("compose_normalized_metric: f and g must be >= 1");
    }
    if (!(h >= 1.0)) {
        throw DomainError("compose_normalized_metric: h must be >= 1");
    }
    return std::min(1.0, base * f * g / h);
}

// ---------------------------------------------------------------------------
// Evaluation

/// Converts integral-valued doubles into labels.
inline std::vector<Label> to_labels(std::span<const double> values, const char* what) {
    std::vector<Label> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
            throw DomainError(std::string(what) + ": value at index " + std::to_string(i) +
                              " is not a class index");
        }
        out[i] = static_cast<Label>(v);
    }
    return out;
}

/// Per-label counts over 0..classes-1.
inline std::vector<std::size_t> label_counts(std::span<const Label> labels, std::size_t classes) {
    std::vector<std::size_t> counts(classes, 0);
    for (auto l : labels) {
        if (l >= classes) {
            throw DomainError("label_counts: label out of range");
        }
        ++counts[l];
    }
    return counts;
}

/// Maps every cluster id to the most frequent true label among its members
/// (ties to the lowest label).
inline std::vector<Label> majority_label_mapping(std::span<const Label> y_true, std::span<const Label> clusters) {
    const std::size_t n_clusters = clusters.empty() ? 0 : *std::max_element(clusters.begin(), clusters.end()) + 1;
    const std::size_t n_labels = y_true.empty() ? 0 : *std::max_element(y_true.begin(), y_true.end()) + 1;
    std::vector<std::vector<std::size_t>> votes(n_clusters, std::vector<std::size_t>(n_labels, 0));
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        ++votes[clusters[i]][y_true[i]];
    }
    std::vector<Label> mapping(n_clusters, 0);
    for (std::size_t c = 0; c < n_clusters; ++c) {
        mapping[c] = static_cast<Label>(std::max_element(votes[c].begin(), votes[c].end()) - votes[c].begin());
    }
    return mapping;
}

/// SNR of a hard clustering: each cluster stands for its majority label and
/// emits a one-hot distribution, which is then scored like a multiclass model.
inline double snr_clustering(std::span<const Label> y_true, std::span<const Label> clusters) {
    detail::require_same_nonempty(y_true, clusters, "snr_clustering");
    const auto mapping = majority_label_mapping(y_true, clusters);
    const std::size_t classes =
        std::max<std::size_t>(2, *std::max_element(y_true.begin(), y_true.end()) + 1);
    std::vector<std::vector<double>> one_hot(y_true.size(), std::vector<double>(classes, 0.0));
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        one_hot[i][mapping[clusters[i]]] = 1.0;
    }
    return snr_multiclass(y_true, one_hot);
}

namespace detail {

inline std::vector<std::size_t> nonzero(std::vector<std::size_t> counts) {
    std::erase(counts, std::size_t{0});
    return counts;
}

} // namespace detail

/// Computes every factor for one evaluation and composes them.
inline MetricBreakdown evaluate(const EvaluationBundle& bundle) {
    if (bundle.y_true.size() != bundle.y_pred.size()) {
        throw ShapeError("evaluate: y_true and y_pred differ in length");
    }
    if (bundle.y_true.empty()) {
        throw DomainError("evaluate: no samples");
    }
    if (bundle.base_metric && !(*bundle.base_metric >= 0.0 && *bundle.base_metric <= 1.0)) {
        throw DomainError("evaluate: base metric must lie in [0, 1]");
    }

    MetricBreakdown out;
    out.dim_factor_f = dimensionality_factor(bundle.d, bundle.n_train);

    switch (bundle.task) {
    case TaskKind::BinaryClassification: {
        if (bundle.y_prob.empty()) {
            throw ConfigError("evaluate: binary classification requires y_prob");
        }
        const auto truth = to_labels(bundle.y_true, "evaluate y_true");
        const auto pred = to_labels(bundle.y_pred, "evaluate y_pred");
        out.base = bundle.base_metric.value_or(accuracy(truth, pred));
        out.snr_db = snr_binary(truth, pred, bundle.y_prob);
        const auto sizes = bundle.group_sizes.empty() ? label_counts(truth, 2) : bundle.group_sizes;
        out.imbalance_ratio = class_imbalance_ratio(sizes);
        out.imbalance_factor_h = imbalance_adjustment_binary(out.imbalance_ratio);
        break;
    }
    case TaskKind::MulticlassClassification: {
        if (bundle.class_probabilities.empty()) {
            throw ConfigError("evaluate: multiclass classification requires class probabilities");
        }
        const auto truth = to_labels(bundle.y_true, "evaluate y_true");
        const auto pred = to_labels(bundle.y_pred, "evaluate y_pred");
        out.base = bundle.base_metric.value_or(accuracy(truth, pred));
        out.snr_db = snr_multiclass(truth, bundle.class_probabilities);
        const auto sizes = bundle.group_sizes.empty()
                               ? label_counts(truth, bundle.class_probabilities.front().size())
                               : bundle.group_sizes;
        out.imbalance_ratio = average_class_imbalance_ratio(sizes);
        out.imbalance_factor_h = imbalance_adjustment_multiclass(out.imbalance_ratio);
        break;
    }
    case TaskKind::Regression: {
        out.base = bundle.base_metric.value_or(mape_score(bundle.y_true, bundle.y_pred));
        out.snr_db = snr_regression(bundle.y_true, bundle.y_pred);
        out.imbalance_ratio = 1.0;
        out.imbalance_factor_h = 1.0;
        break;
    }
    case TaskKind::Clustering: {
        const auto truth = to_labels(bundle.y_true, "evaluate y_true");
        const auto clusters = to_labels(bundle.y_pred, "evaluate y_pred");
        out.base = bundle.base_metric.value_or(nmi(truth, clusters));
        out.snr_db = snr_clustering(truth, clusters);
        // Counting from assignments only sees occupied clusters.
        const auto sizes =
            bundle.group_sizes.empty()
                ? detail::nonzero(label_counts(clusters, *std::max_element(clusters.begin(), clusters.end()) + 1))
                : bundle.group_sizes;
        out.imbalance_ratio = average_class_imbalance_ratio(sizes);
        out.imbalance_factor_h = imbalance_adjustment_multiclass(out.imbalance_ratio);
        break;
    }
    }

    out.snr_normalized = normalize_snr(out.snr_db);
    out.snr_factor_g = snr_adjustment(out.snr_normalized);
    out.normalized = compose_normalized_metric(out.base, out.dim_factor_f, out.snr_factor_g, out.imbalance_factor_h);
    return out;
}

} // namespace normetric
