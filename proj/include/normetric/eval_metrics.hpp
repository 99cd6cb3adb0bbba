#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "normetric/errors.hpp"

namespace normetric {

/// Class index (classification) or cluster id (clustering).
using Label = std::size_t;

namespace detail {

template <class A, class B>
void require_same_nonempty(std::span<const A> a, std::span<const B> b, const char* what) {
    if (a.size() != b.size()) {
        throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    }
    if (a.empty()) {
        throw DomainError(std::string(what) + ": empty input");
    }
}

} // namespace detail

/// C x C count grid. Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes)
        : classes_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const { return classes_; }

    std::size_t at(std::size_t truth, std::size_t predicted) const {
        return counts_[truth * classes_ + predicted];
    }

    void add(std::size_t truth, std::size_t predicted) { ++counts_[truth * classes_ + predicted]; }

    /// True-positive count for class i.
    std::size_t true_positives(std::size_t i) const { return at(i, i); }

    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < classes_; ++i) {
            t += at(i, i);
        }
        return t;
    }

    std::size_t total() const {
        std::size_t t = 0;
        for (auto c : counts_) {
            t += c;
        }
        return t;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t classes_;
    std::vector<std::size_t> counts_;
};

/// Fraction of positions where the two label sequences agree.
inline double accuracy(std::span<const Label> y_true, std::span<const Label> y_pred) {
    detail::require_same_nonempty(y_true, y_pred, "accuracy");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        correct += (y_true[i] == y_pred[i]) ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(y_true.size());
}

/// 1 - MAPE, floored at 0 so it can serve as a base metric in [0, 1].
inline double mape_score(std::span<const double> y_true, std::span<const double> y_pred) {
    detail::require_same_nonempty(y_true, y_pred, "mape_score");
    double sum = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 0.0) {
            throw DomainError("mape_score: true value at index " + std::to_string(i) + " is zero");
        }
        sum += std::abs(y_pred[i] - y_true[i]) / std::abs(y_true[i]);
    }
    const double mape = sum / static_cast<double>(y_true.size());
    return std::max(0.0, 1.0 - mape);
}

inline ConfusionMatrix confusion_matrix(std::span<const Label> y_true, std::span<const Label> y_pred,
                                        std::size_t classes) {
    if (y_true.size() != y_pred.size()) {
        throw ShapeError("confusion_matrix: length mismatch");
    }
    ConfusionMatrix m(classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] >= classes || y_pred[i] >= classes) {
            throw DomainError("confusion_matrix: label out of range [0, " + std::to_string(classes) +
                              ") at index " + std::to_string(i));
        }
        m.add(y_true[i], y_pred[i]);
    }
    return m;
}

/// Normalized mutual information, MI / mean(H(a), H(b)).
///
/// Two single-cluster partitions are identical by convention (1.0); if only
/// one side is single-cluster there is no shared information (0.0).
inline double nmi(std::span<const Label> labels_a, std::span<const Label> labels_b) {
    if (labels_a.size() != labels_b.size()) {
        throw ShapeError("nmi: length mismatch");
    }
    if (labels_a.empty()) {
        throw DomainError("nmi: empty input");
    }
    const double n = static_cast<double>(labels_a.size());

    std::map<std::pair<Label, Label>, std::size_t> joint;
    std::map<Label, std::size_t> count_a;
    std::map<Label, std::size_t> count_b;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        ++joint[{labels_a[i], labels_b[i]}];
        ++count_a[labels_a[i]];
        ++count_b[labels_b[i]];
    }

    auto entropy = [n](const std::map<Label, std::size_t>& counts) {
        double h = 0.0;
        for (const auto& [label, c] : counts) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log(p);
        }
        return h;
    };
    const double h_a = entropy(count_a);
    const double h_b = entropy(count_b);

    if (count_a.size() == 1 && count_b.size() == 1) {
        return 1.0;
    }
    if (count_a.size() == 1 || count_b.size() == 1) {
        return 0.0;
    }

    double mi = 0.0;
    for (const auto& [key, c] : joint) {
        const double p_ab = static_cast<double>(c) / n;
        const double p_a = static_cast<double>(count_a[key.first]) / n;
        const double p_b = static_cast<double>(count_b[key.second]) / n;
        mi += p_ab * std::log(p_ab / (p_a * p_b));
    }
    return std::clamp(mi / (0.5 * (h_a + h_b)), 0.0, 1.0);
}

} // namespace normetric
