#pragma once

// Learning-curve experiments: train at every schedule size on a growing
// prefix of one shuffled training pool, score on a fixed test split, and
// compare the base metric against its normalized counterpart.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "normetric/data_pipeline.hpp"
#include "normetric/errors.hpp"
#include "normetric/eval_metrics.hpp"
#include "normetric/learners.hpp"
#include "normetric/metric_core.hpp"
#include "normetric/random.hpp"

namespace normetric {

struct CurvePoint {
    std::size_t train_size = 0;
    double base_metric = 0.0;
    double adjusted_metric = 0.0;
    MetricBreakdown breakdown;
};

struct LearnerConfig {
    std::size_t epochs = 500;
    double learning_rate = 0.1;
    /// Cluster count; 0 means the number of classes in the dataset.
    std::size_t k = 0;
    std::size_t kmeans_max_iters = 300;
};

struct CurveOptions {
    double test_fraction = 0.2;
    /// Feature count passed to the metric; defaults to the dataset's.
    std::optional<std::size_t> d_override;
    LearnerConfig learner;
};

/// Per-column z-scores from one sample; constant columns pass through centered.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer fit(const Matrix& x) {
        Standardizer s;
        s.mean = x.colwise().mean();
        const Matrix centered = x.rowwise() - s.mean;
        s.scale = (centered.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
        for (Eigen::Index c = 0; c < s.scale.size(); ++c) {
            if (!(s.scale(c) > 0.0)) {
                s.scale(c) = 1.0;
            }
        }
        return s;
    }

    Matrix transform(const Matrix& x) const {
        return (x.rowwise() - mean).array().rowwise() / scale.array();
    }
};

namespace detail {

inline std::vector<std::vector<double>> rows_of(const Matrix& p) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        out[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(p.cols()));
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = p(i, j);
        }
    }
    return out;
}

inline std::vector<double> as_doubles(std::span<const Label> labels) {
    return {labels.begin(), labels.end()};
}

} // namespace detail

/// Trains the task's learner on `train` and scores it on `test`.
/// `n_train` in the returned breakdown is the training row count.
inline CurvePoint evaluate_fit(const Dataset& train, const Dataset& test, TaskKind task, std::size_t d,
                               const LearnerConfig& learner, std::uint64_t seed) {
    const Standardizer scaler = Standardizer::fit(train.features);
    const Matrix x_train = scaler.transform(train.features);
    const Matrix x_test = scaler.transform(test.features);

    EvaluationBundle bundle;
    bundle.task = task;
    bundle.d = d;
    bundle.n_train = train.n();
    bundle.y_true = test.target;

    switch (task) {
    case TaskKind::BinaryClassification:
    case TaskKind::MulticlassClassification: {
        const std::size_t classes = std::max<std::size_t>(2, train.class_count());
        const auto train_labels = train.labels();
        const LogisticModel model =
            fit_logistic(x_train, train_labels, classes, {learner.epochs, learner.learning_rate, seed});
        const Matrix proba = model.predict_proba(x_test);
        const auto pred = model.predict(x_test);
        bundle.y_pred = detail::as_doubles(pred);
        if (task == TaskKind::BinaryClassification) {
            for (std::size_t i = 0; i < pred.size(); ++i) {
                bundle.y_prob.push_back(proba(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(pred[i])));
            }
            bundle.group_sizes = label_counts(train_labels, 2);
        } else {
            bundle.class_probabilities = detail::rows_of(proba);
            // Classes absent from a small prefix are left out of ACIR.
            bundle.group_sizes = detail::nonzero(label_counts(train_labels, classes));
        }
        break;
    }
    case TaskKind::Regression: {
        const LinearModel model = fit_linear(x_train, train.target);
        const Vector pred = model.predict(x_test);
        bundle.y_pred.assign(pred.data(), pred.data() + pred.size());
        break;
    }
    case TaskKind::Clustering: {
        const std::size_t k = learner.k > 0 ? learner.k : std::max<std::size_t>(2, train.class_count());
        const KMeansModel model = fit_kmeans(x_train, {k, learner.kmeans_max_iters, seed});
        bundle.y_pred = detail::as_doubles(model.predict(x_test));
        bundle.group_sizes = detail::nonzero(model.cluster_sizes());
        break;
    }
    }

    CurvePoint point;
    point.train_size = train.n();
    point.breakdown = evaluate(bundle);
    point.base_metric = point.breakdown.base;
    point.adjusted_metric = point.breakdown.normalized;
    return point;
}

/// One CurvePoint per schedule size.
///
/// The dataset is split once; the training pool is shuffled once and every
/// size m trains on its first m rows, so larger samples contain smaller ones.
/// Each size draws learner randomness from derive_seed(seed, m).
inline std::vector<CurvePoint> run_curve(const Dataset& ds, const SampleSchedule& sched, TaskKind task,
                                         const CurveOptions& options, std::uint64_t seed) {
    const Split parts = split(ds, options.test_fraction, seed);
    const std::size_t pool_size = parts.train.n();
    for (auto m : sched.sizes) {
        if (m > pool_size) {
            throw ScheduleError("schedule size " + std::to_string(m) + " exceeds the training pool of " +
                                std::to_string(pool_size) + " rows");
        }
    }

    Rng rng(derive_seed(seed, 0xC0FFEE));
    const auto order = permutation(pool_size, rng);
    const Dataset pool = parts.train.subset(order);
    const std::size_t d = options.d_override.value_or(ds.d());

    std::vector<std::size_t> prefix;
    std::vector<CurvePoint> points;
    points.reserve(sched.sizes.size());
    for (auto m : sched.sizes) {
        prefix.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            prefix[i] = i;
        }
        points.push_back(evaluate_fit(pool.subset(prefix), parts.test, task, d, options.learner, derive_seed(seed, m)));
    }
    return points;
}

/// Centered moving average of base and adjusted series; the window shrinks
/// at both ends. Breakdowns are carried over unchanged.
inline std::vector<CurvePoint> smooth(std::span<const CurvePoint> points, std::size_t window) {
    if (window < 1 || window % 2 == 0) {
        throw DomainError("smooth: window must be a positive odd count");
    }
    const std::size_t half = window / 2;
    std::vector<CurvePoint> out(points.begin(), points.end());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(points.size() - 1, i + half);
        double base = 0.0;
        double adjusted = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            base += points[j].base_metric;
            adjusted += points[j].adjusted_metric;
        }
        const auto count = static_cast<double>(hi - lo + 1);
        out[i].base_metric = base / count;
        out[i].adjusted_metric = adjusted / count;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stability report

struct MetricStability {
    double overall_avg = 0.0;
    double avg_before = 0.0;
    double avg_after = 0.0;
    double mad_from_target = 0.0;
};

struct StabilityReport {
    std::size_t threshold_n_star = 0;
    MetricStability initial;
    MetricStability adjusted;
};

/// Which points the mean absolute deviation is taken over.
enum class MadScope { All, Before };

inline constexpr std::size_t kSamplesPerFeature = 20;

/// Averages before/after N* and the mean absolute deviation of each series
/// from T, the mean initial metric over sizes >= N*.
inline StabilityReport stability_report(std::span<const CurvePoint> points, std::size_t threshold_n_star,
                                        MadScope scope = MadScope::All) {
    StabilityReport report;
    report.threshold_n_star = threshold_n_star;

    std::size_t before = 0;
    std::size_t after = 0;
    for (const auto& p : points) {
        (p.train_size < threshold_n_star ? before : after) += 1;
    }
    if (before == 0) {
        throw ReportError("stability_report: no points before N* = " + std::to_string(threshold_n_star));
    }
    if (after == 0) {
        throw ReportError("stability_report: no points at or after N* = " + std::to_string(threshold_n_star));
    }

    auto summarize = [&](auto metric) {
        MetricStability s;
        double sum_before = 0.0;
        double sum_after = 0.0;
        for (const auto& p : points) {
            (p.train_size < threshold_n_star ? sum_before : sum_after) += metric(p);
        }
        s.overall_avg = (sum_before + sum_after) / static_cast<double>(points.size());
        s.avg_before = sum_before / static_cast<double>(before);
        s.avg_after = sum_after / static_cast<double>(after);
        return s;
    };
    auto initial_of = [](const CurvePoint& p) { return p.base_metric; };
    auto adjusted_of = [](const CurvePoint& p) { return p.adjusted_metric; };
    report.initial = summarize(initial_of);
    report.adjusted = summarize(adjusted_of);

    const double target = report.initial.avg_after;
    auto mad = [&](auto metric) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& p : points) {
            if (scope == MadScope::Before && p.train_size >= threshold_n_star) {
                continue;
            }
            sum += std::abs(metric(p) - target);
            ++count;
        }
        return sum / static_cast<double>(count);
    };
    report.initial.mad_from_target = mad(initial_of);
    report.adjusted.mad_from_target = mad(adjusted_of);
    return report;
}

inline StabilityReport stability_report_for_features(std::span<const CurvePoint> points, std::size_t d,
                                                     MadScope scope = MadScope::All) {
    return stability_report(points, kSamplesPerFeature * d, scope);
}

// ---------------------------------------------------------------------------
// Series CSV

inline const std::vector<std::string>& series_columns() {
    static const std::vector<std::string> cols{"train_size", "base_metric",    "adjusted_metric",
                                               "f",          "g",              "h",
                                               "snr_db",     "snr_normalized", "imbalance_ratio"};
    return cols;
}

/// Raw points in the nine series columns, followed by the smoothed display
/// columns `base_smoothed` and `adjusted_smoothed`.
inline void write_series(std::ostream& out, std::span<const CurvePoint> raw, std::span<const CurvePoint> smoothed) {
    if (raw.size() != smoothed.size()) {
        throw ShapeError("write_series: raw and smoothed series differ in length");
    }
    for (const auto& c : series_columns()) {
        out << c << ',';
    }
    out << "base_smoothed,adjusted_smoothed\n";
    using csv::format_real;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& p = raw[i];
        const auto& b = p.breakdown;
        out << p.train_size << ',' << format_real(p.base_metric) << ',' << format_real(p.adjusted_metric) << ','
            << format_real(b.dim_factor_f) << ',' << format_real(b.snr_factor_g) << ','
            << format_real(b.imbalance_factor_h) << ',' << format_real(b.snr_db) << ','
            << format_real(b.snr_normalized) << ',' << format_real(b.imbalance_ratio) << ','
            << format_real(smoothed[i].base_metric) << ',' << format_real(smoothed[i].adjusted_metric) << '\n';
    }
}

/// Reads the raw points back from a series CSV. Columns are located by name.
inline std::vector<CurvePoint> read_series(std::istream& in) {
    std::vector<std::string> header;
    if (!csv::read_record(in, header)) {
        throw EmptyDataError("series CSV has no header");
    }
    std::vector<std::size_t> index;
    for (const auto& name : series_columns()) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw MissingColumnError("series CSV lacks column '" + name + "'");
        }
        index.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    auto real = [](const std::string& s) -> double {
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        const auto v = csv::parse_real(s);
        if (!v) {
            throw DataError("series CSV: cannot parse '" + s + "'");
        }
        return *v;
    };

    std::vector<CurvePoint> points;
    std::vector<std::string> rec;
    while (csv::read_record(in, rec)) {
        if (rec.size() == 1 && rec[0].empty()) {
            continue;
        }
        if (rec.size() != header.size()) {
            throw DataError("series CSV: row " + std::to_string(points.size() + 1) + " has the wrong field count");
        }
        CurvePoint p;
        const double size = real(rec[index[0]]);
        if (size < 0.0 || size != std::floor(size)) {
            throw DataError("series CSV: train_size must be a whole number");
        }
        p.train_size = static_cast<std::size_t>(size);
        p.base_metric = real(rec[index[1]]);
        p.adjusted_metric = real(rec[index[2]]);
        p.breakdown.base = p.base_metric;
        p.breakdown.normalized = p.adjusted_metric;
        p.breakdown.dim_factor_f = real(rec[index[3]]);
        p.breakdown.snr_factor_g = real(rec[index[4]]);
        p.breakdown.imbalance_factor_h = real(rec[index[5]]);
        p.breakdown.snr_db = real(rec[index[6]]);
        p.breakdown.snr_normalized = real(rec[index[7]]);
        p.breakdown.imbalance_ratio = real(rec[index[8]]);
        points.push_back(p);
    }
    if (points.empty()) {
        throw EmptyDataError("series CSV has no rows");
    }
    return points;
}

} // namespace normetric
