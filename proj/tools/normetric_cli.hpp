#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage, 2 data, 3 numeric.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "normetric.hpp"

namespace normetric::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline nlohmann::json real_json(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

inline nlohmann::json to_json(const MetricBreakdown& b) {
    return nlohmann::json{{"base", b.base},
                          {"dim_factor_f", b.dim_factor_f},
                          {"snr_db", real_json(b.snr_db)},
                          {"snr_normalized", b.snr_normalized},
                          {"snr_factor_g", b.snr_factor_g},
                          {"imbalance_ratio", b.imbalance_ratio},
                          {"imbalance_factor_h", b.imbalance_factor_h},
                          {"normalized", b.normalized}};
}

/// Report JSON with every real rounded to six decimal places.
inline std::string report_json(const StabilityReport& r) {
    auto metric = [](const MetricStability& m) {
        return nlohmann::json{{"overall_avg", round6(m.overall_avg)},
                              {"avg_before", round6(m.avg_before)},
                              {"avg_after", round6(m.avg_after)},
                              {"mad_from_target", round6(m.mad_from_target)}};
    };
    const nlohmann::json j{{"threshold_n_star", r.threshold_n_star},
                           {"initial", metric(r.initial)},
                           {"adjusted", metric(r.adjusted)}};
    return j.dump(2) + "\n";
}

inline MadScope parse_mad_scope(const std::string& s) {
    if (s == "all") return MadScope::All;
    if (s == "before") return MadScope::Before;
    throw ConfigError("unknown MAD scope '" + s + "'");
}

/// Reads an `evaluate` predictions file into a bundle (labels, probabilities).
inline EvaluationBundle read_predictions(std::istream& in, TaskKind task) {
    std::vector<std::string> header;
    if (!csv::read_record(in, header)) {
        throw EmptyDataError("predictions file has no header");
    }
    for (auto& h : header) {
        h = csv::trim(h);
    }
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    auto required = [&](const std::string& name) {
        const auto c = column(name);
        if (!c) throw MissingColumnError("predictions file lacks column '" + name + "'");
        return *c;
    };

    const std::size_t c_true = required("y_true");
    const std::size_t c_pred = required("y_pred");
    std::optional<std::size_t> c_prob;
    std::vector<std::size_t> c_class;
    if (task == TaskKind::BinaryClassification) {
        c_prob = required("y_prob");
    } else if (task == TaskKind::MulticlassClassification) {
        for (std::size_t j = 0;; ++j) {
            const auto c = column("p_" + std::to_string(j));
            if (!c) break;
            c_class.push_back(*c);
        }
        if (c_class.size() < 2) {
            throw MissingColumnError("multiclass predictions need columns p_0 .. p_{C-1} with C >= 2");
        }
    }

    EvaluationBundle bundle;
    bundle.task = task;
    std::vector<std::string> rec;
    std::size_t line = 1;
    auto real = [&](const std::string& s) {
        const auto v = csv::parse_real(s);
        if (!v) throw DataError("predictions line " + std::to_string(line) + ": cannot parse '" + s + "'");
        return *v;
    };
    while (csv::read_record(in, rec)) {
        ++line;
        if (rec.size() == 1 && csv::trim(rec[0]).empty()) continue;
        if (rec.size() != header.size()) {
            throw DataError("predictions line " + std::to_string(line) + " has the wrong field count");
        }
        bundle.y_true.push_back(real(rec[c_true]));
        bundle.y_pred.push_back(real(rec[c_pred]));
        if (c_prob) bundle.y_prob.push_back(real(rec[*c_prob]));
        if (!c_class.empty()) {
            std::vector<double> row;
            for (auto c : c_class) row.push_back(real(rec[c]));
            bundle.class_probabilities.push_back(std::move(row));
        }
    }
    if (bundle.y_true.empty()) {
        throw EmptyDataError("predictions file has no rows");
    }
    return bundle;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write '" + path + "'");
    out << text;
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Dataset-adaptive normalized metric: evaluation, learning curves, stability reports"};
    app.name("normetric");
    app.require_subcommand(1);

    std::string task_name;
    std::uint64_t seed = 42;
    double test_fraction = 0.2;
    std::optional<std::size_t> d_flag;
    std::optional<std::size_t> n_star_flag;
    std::size_t smooth_window = 5;

    auto add_common = [&](CLI::App* sub, bool task_required) {
        auto* opt = sub->add_option("--task", task_name, "binary | multiclass | regression | clustering")
                        ->check(CLI::IsMember({"binary", "multiclass", "regression", "clustering"}));
        if (task_required) opt->required();
        sub->add_option("--seed", seed, "Random seed")->capture_default_str();
        sub->add_option("--test-fraction", test_fraction, "Held-out fraction")->capture_default_str();
        sub->add_option("--d", d_flag, "Feature count override");
        sub->add_option("--n-star", n_star_flag, "Threshold override (default 20 * d)");
        sub->add_option("--smooth-window", smooth_window, "Odd smoothing window for display columns")
            ->capture_default_str();
    };

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score one predictions file");
    add_common(evaluate_cmd, true);
    std::string predictions_path;
    std::size_t n_train = 0;
    std::vector<std::size_t> group_sizes;
    std::optional<double> base_flag;
    evaluate_cmd->add_option("--predictions", predictions_path, "CSV with y_true, y_pred and probabilities")
        ->required();
    evaluate_cmd->add_option("--n", n_train, "Training sample count")->required();
    evaluate_cmd->add_option("--class-sizes", group_sizes, "Training class or cluster counts")->delimiter(',');
    evaluate_cmd->add_option("--base", base_flag, "Base metric override in [0, 1]");

    // curve
    auto* curve_cmd = app.add_subcommand("curve", "Run a learning-curve experiment");
    add_common(curve_cmd, true);
    std::string data_path;
    std::string target_column;
    std::size_t start = 0, stop = 0, step = 0;
    std::string series_path;
    std::string report_path;
    std::string mad_scope = "all";
    LearnerConfig learner;
    curve_cmd->add_option("--data", data_path, "Dataset CSV")->required();
    curve_cmd->add_option("--target-column", target_column, "Target column name")->required();
    curve_cmd->add_option("--start", start, "First training size")->required();
    curve_cmd->add_option("--stop", stop, "Last training size")->required();
    curve_cmd->add_option("--step", step, "Size increment")->required();
    curve_cmd->add_option("--series", series_path, "Series CSV output");
    curve_cmd->add_option("--report", report_path, "Report JSON output (stdout when omitted)");
    curve_cmd->add_option("--mad-scope", mad_scope, "all | before")->capture_default_str();
    curve_cmd->add_option("--epochs", learner.epochs, "Gradient-descent epochs")->capture_default_str();
    curve_cmd->add_option("--lr", learner.learning_rate, "Learning rate")->capture_default_str();
    curve_cmd->add_option("--k", learner.k, "Cluster count (default: class count)");
    curve_cmd->add_option("--max-iters", learner.kmeans_max_iters, "k-means iteration cap")->capture_default_str();

    // expand
    auto* expand_cmd = app.add_subcommand("expand", "Synthetically expand a dataset");
    add_common(expand_cmd, true);
    std::string expand_out;
    std::size_t target_n = 0;
    std::size_t k_neighbors = 5;
    expand_cmd->add_option("--data", data_path, "Dataset CSV")->required();
    expand_cmd->add_option("--target-column", target_column, "Target column name")->required();
    expand_cmd->add_option("--target-n", target_n, "Row count after expansion")->required();
    expand_cmd->add_option("--k-neighbors", k_neighbors, "Neighbors per anchor")->capture_default_str();
    expand_cmd->add_option("--out", expand_out, "Output CSV")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "Recompute a stability report from a series CSV");
    add_common(report_cmd, false);
    report_cmd->add_option("--series", series_path, "Series CSV")->required();
    report_cmd->add_option("--report", report_path, "Report JSON output (stdout when omitted)");
    report_cmd->add_option("--mad-scope", mad_scope, "all | before")
        ->check(CLI::IsMember({"all", "before"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << failed->help();
        return kUsage;
    }

    try {
        if (evaluate_cmd->parsed()) {
            const TaskKind task = parse_task(task_name);
            if (!d_flag) {
                err << "error: evaluate requires --d\n";
                return kUsage;
            }
            std::ifstream in(predictions_path, std::ios::binary);
            if (!in) throw FileError("cannot open '" + predictions_path + "'");
            EvaluationBundle bundle = read_predictions(in, task);
            bundle.d = *d_flag;
            bundle.n_train = n_train;
            bundle.group_sizes = group_sizes;
            bundle.base_metric = base_flag;
            out << to_json(evaluate(bundle)).dump(2) << "\n";
            return kOk;
        }

        if (curve_cmd->parsed()) {
            const TaskKind task = parse_task(task_name);
            const MadScope scope = parse_mad_scope(mad_scope);
            const auto loaded = load_csv(data_path, target_column, task);
            if (loaded.dropped_rows > 0) {
                err << "note: dropped " << loaded.dropped_rows << " unusable row(s)\n";
            }
            const SampleSchedule sched = schedule(start, stop, step);
            CurveOptions options;
            options.test_fraction = test_fraction;
            options.d_override = d_flag;
            options.learner = learner;
            const auto points = run_curve(loaded.data, sched, task, options, seed);
            const std::size_t d = d_flag.value_or(loaded.data.d());
            const std::size_t n_star = n_star_flag.value_or(kSamplesPerFeature * d);
            const auto smoothed = smooth(points, smooth_window);
            if (!series_path.empty()) {
                std::ostringstream series;
                write_series(series, points, smoothed);
                write_text(series_path, series.str());
            }
            const std::string report = report_json(stability_report(points, n_star, scope));
            if (report_path.empty()) {
                out << report;
            } else {
                write_text(report_path, report);
            }
            return kOk;
        }

        if (expand_cmd->parsed()) {
            const TaskKind task = parse_task(task_name);
            const auto loaded = load_csv(data_path, target_column, task);
            save_csv(expand_out, synthetic_expand(loaded.data, target_n, k_neighbors, seed));
            return kOk;
        }

        if (report_cmd->parsed()) {
            if (!d_flag && !n_star_flag) {
                err << "error: report requires --d or --n-star\n\n" << report_cmd->help();
                return kUsage;
            }
            std::ifstream in(series_path, std::ios::binary);
            if (!in) throw FileError("cannot open '" + series_path + "'");
            const auto points = read_series(in);
            const std::size_t n_star = n_star_flag.value_or(kSamplesPerFeature * d_flag.value_or(0));
            const std::string report = report_json(stability_report(points, n_star, parse_mad_scope(mad_scope)));
            if (report_path.empty()) {
                out << report;
            } else {
                write_text(report_path, report);
            }
            return kOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}

} // namespace normetric::cli
