// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each criterion carries its own runtime budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "normetric.hpp"
#include "normetric_cli.hpp"
#include "oracle/transcription.hpp"
#include "support/generators.hpp"

using namespace normetric;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Collects failures; only the first few messages are kept.
struct Checker {
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::string first;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            if (failures < 3) first += (first.empty() ? "" : "; ") + what;
            ++failures;
        }
    }
    void near(double got, double want, double tol, const std::string& what) {
        const bool same_inf = std::isinf(got) && got == want;
        expect(same_inf || std::abs(got - want) <= tol,
               what + ": got " + std::to_string(got) + " want " + std::to_string(want));
    }
    Outcome outcome(const std::string& summary) const {
        if (failures == 0) return {true, summary + " (" + std::to_string(checks) + " checks)"};
        return {false, std::to_string(failures) + "/" + std::to_string(checks) + " checks failed: " + first};
    }
};

/// Relative-or-absolute agreement, with matching infinities.
bool agree(double a, double b, double tol) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Anchors

Outcome anchors() {
    Checker c;
    const double tol = 1e-12;
    c.near(imbalance_adjustment_binary(1000.0), 4.0, tol, "h(CI=1000)");
    const std::vector<std::size_t> skewed{1000, 1};
    c.near(imbalance_adjustment_binary(class_imbalance_ratio(skewed)), 4.0, tol, "h(sizes 1000:1)");
    c.near(imbalance_adjustment_binary(1.0), 1.0, tol, "h(CI=1)");
    c.near(dimensionality_factor(10, 200), 1.0, tol, "f(10,200)");
    c.near(normalize_snr(0.0), 0.125, tol, "normalize_snr(0)");
    for (double x : {40.0, 40.5, 55.0, 1e6, std::numeric_limits<double>::infinity()}) {
        c.near(normalize_snr(x), 0.5, tol, "normalize_snr(" + fmt(x, 1) + ")");
    }
    return c.outcome("exact anchors");
}

// ---------------------------------------------------------------------------
// 2. Transcription oracle

std::vector<std::size_t> random_sizes(Rng& rng, std::size_t k) {
    std::vector<std::size_t> s(k);
    for (auto& v : s) v = 1 + uniform_index(rng, 500);
    return s;
}

std::vector<double> as_real(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

std::vector<int> as_int(const std::vector<Label>& v) { return {v.begin(), v.end()}; }

std::vector<double> random_distribution(Rng& rng, std::size_t classes) {
    std::vector<double> p(classes);
    double sum = 0.0;
    for (auto& v : p) sum += (v = open_unit_uniform(rng));
    for (auto& v : p) v /= sum;
    return p;
}

Outcome transcription() {
    Checker c;
    const double tol = 1e-9;
    Rng rng(20240601);
    const int trials = 1000;

    for (int t = 0; t < trials; ++t) {
        const std::size_t d = 1 + uniform_index(rng, 200);
        const std::size_t n = 1 + uniform_index(rng, 5000);
        c.expect(agree(dimensionality_factor(d, n), oracle::dim_factor(double(d), double(n)), tol), "f");
    }
    for (int t = 0; t < trials; ++t) {
        const auto s = random_sizes(rng, 2);
        c.expect(agree(imbalance_adjustment_binary(class_imbalance_ratio(s)),
                       oracle::h_ci(double(std::max(s[0], s[1])), double(std::min(s[0], s[1]))), tol),
                 "h(CI)");
    }
    for (int t = 0; t < trials; ++t) {
        const auto s = random_sizes(rng, 2 + uniform_index(rng, 9));
        const double acir = average_class_imbalance_ratio(s);
        c.expect(agree(acir, oracle::acir(as_real(s)), tol), "ACIR");
        c.expect(agree(imbalance_adjustment_multiclass(acir), oracle::h_acir(oracle::acir(as_real(s))), tol),
                 "h(ACIR)");
    }
    for (int t = 0; t < trials; ++t) {
        const std::size_t n = 1 + uniform_index(rng, 60);
        std::vector<double> y(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = 100.0 * (unit_uniform(rng) - 0.3);
            p[i] = t % 10 == 0 ? y[i] : y[i] + 5.0 * standard_normal(rng);
        }
        c.expect(agree(snr_regression(y, p), oracle::snr_regression(y, p), tol), "SNR regression");
    }
    for (int t = 0; t < trials; ++t) {
        const double x = -20.0 + 80.0 * unit_uniform(rng);
        c.expect(agree(normalize_snr(x), oracle::normalized_snr(x), tol), "normalized SNR");
        const double v = normalize_snr(x);
        c.expect(agree(snr_adjustment(v), oracle::g(oracle::normalized_snr(x)), tol), "g");
    }
    for (int t = 0; t < trials; ++t) {
        const std::size_t n = 1 + uniform_index(rng, 60);
        std::vector<Label> y(n), yp(n);
        std::vector<double> prob(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = uniform_index(rng, 2);
            yp[i] = uniform_index(rng, 2);
            prob[i] = t % 10 == 0 ? 1.0 : unit_uniform(rng);
        }
        bool undefined = false;
        double got = 0.0;
        try {
            got = snr_binary(y, yp, prob);
        } catch (const UndefinedError&) {
            undefined = true;
        }
        const double want = oracle::snr_binary(as_int(y), as_int(yp), prob);
        c.expect(undefined ? std::isinf(want) : agree(got, want, tol), "SNR binary");
    }
    for (int t = 0; t < trials; ++t) {
        const std::size_t n = 1 + uniform_index(rng, 60);
        const std::size_t classes = 3 + uniform_index(rng, 5);
        std::vector<Label> y(n);
        std::vector<std::vector<double>> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = uniform_index(rng, classes);
            p[i] = random_distribution(rng, classes);
        }
        c.expect(agree(snr_multiclass(y, p), oracle::snr_multiclass(as_int(y), p), tol), "SNR multiclass");
    }
    for (int t = 0; t < trials; ++t) {
        const double base = unit_uniform(rng);
        const double f = 1.0 + 0.5 * unit_uniform(rng);
        const double g = 1.0 + 0.5 * unit_uniform(rng);
        const double h = 1.0 + 3.0 * unit_uniform(rng);
        c.expect(agree(compose_normalized_metric(base, f, g, h), oracle::normalized_metric(base, f, g, h), tol),
                 "composition");
    }
    return c.outcome("library matches the reference formulas");
}

// ---------------------------------------------------------------------------
// 3. Properties

/// Calls `visit` with every sequence of length n over {0..k-1}.
void each_sequence(std::size_t n, std::size_t k, const std::function<void(const std::vector<Label>&)>& visit) {
    std::vector<Label> seq(n, 0);
    while (true) {
        visit(seq);
        std::size_t i = 0;
        while (i < n && ++seq[i] == k) seq[i++] = 0;
        if (i == n) return;
    }
}

template <class T>
std::vector<T> rotated_reversed(const std::vector<T>& v) {
    std::vector<T> out(v);
    std::rotate(out.begin(), out.begin() + 1, out.end());
    std::reverse(out.begin(), out.end());
    return out;
}

/// SNR, or NaN when undefined.
double snr_or_nan(const std::function<double()>& snr) {
    try {
        return snr();
    } catch (const UndefinedError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

bool same_snr(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
    return agree(a, b, 1e-12);
}

/// Checks the composed breakdown of one instance.
void check_breakdown(Checker& c, const MetricBreakdown& r) {
    c.expect(r.dim_factor_f >= 1.0 && r.dim_factor_f <= 1.5, "f range");
    c.expect(r.snr_factor_g >= 1.0 && r.snr_factor_g <= 1.5, "g range");
    c.expect(r.imbalance_factor_h >= 1.0, "h >= 1");
    c.expect(r.normalized >= 0.0 && r.normalized <= 1.0, "cap");
    c.expect(r.normalized == std::min(1.0, r.base * r.dim_factor_f * r.snr_factor_g / r.imbalance_factor_h),
             "composition");
}

void classification_instance(Checker& c, const std::vector<Label>& y, const std::vector<Label>& yp, std::size_t k,
                             std::size_t d, std::size_t n_train) {
    const std::size_t n = y.size();
    if (k == 2) {
        std::vector<double> prob(n);
        for (std::size_t i = 0; i < n; ++i) prob[i] = 0.5 + 0.125 * double((i + y[i] + 2 * yp[i]) % 5);
        const double a = snr_or_nan([&] { return snr_binary(y, yp, prob); });
        const double b = snr_or_nan(
            [&] { return snr_binary(rotated_reversed(y), rotated_reversed(yp), rotated_reversed(prob)); });
        c.expect(same_snr(a, b), "binary SNR permutation invariance");
        if (std::isnan(a)) return;
        EvaluationBundle bundle;
        bundle.task = TaskKind::BinaryClassification;
        bundle.y_true.assign(y.begin(), y.end());
        bundle.y_pred.assign(yp.begin(), yp.end());
        bundle.y_prob = prob;
        bundle.d = d;
        bundle.n_train = n_train;
        bundle.group_sizes = {1 + y[0] + n, 1 + n};
        check_breakdown(c, evaluate(bundle));
    } else {
        std::vector<std::vector<double>> p(n, std::vector<double>(k, 0.2 / double(k - 1)));
        for (std::size_t i = 0; i < n; ++i) p[i][yp[i]] = 0.8;
        const double a = snr_or_nan([&] { return snr_multiclass(y, p); });
        const double b = snr_or_nan([&] { return snr_multiclass(rotated_reversed(y), rotated_reversed(p)); });
        c.expect(same_snr(a, b), "multiclass SNR permutation invariance");
        const double ca = snr_or_nan([&] { return snr_clustering(y, yp); });
        const double cb = snr_or_nan([&] { return snr_clustering(rotated_reversed(y), rotated_reversed(yp)); });
        c.expect(same_snr(ca, cb), "clustering SNR permutation invariance");
        if (!std::isnan(a)) {
            EvaluationBundle bundle;
            bundle.task = TaskKind::MulticlassClassification;
            bundle.y_true.assign(y.begin(), y.end());
            bundle.y_pred.assign(yp.begin(), yp.end());
            bundle.class_probabilities = p;
            bundle.d = d;
            bundle.n_train = n_train;
            bundle.group_sizes.assign(k, n);
            bundle.group_sizes[y[0]] += 1;
            check_breakdown(c, evaluate(bundle));
        }
    }
}

void regression_instance(Checker& c, const std::vector<double>& y, const std::vector<double>& yp) {
    const double a = snr_or_nan([&] { return snr_regression(y, yp); });
    const double b = snr_or_nan([&] { return snr_regression(rotated_reversed(y), rotated_reversed(yp)); });
    c.expect(same_snr(a, b), "regression SNR permutation invariance");
}

void factor_properties(Checker& c) {
    // f: range, neutrality at and beyond 20d, monotone in n and d.
    for (std::size_t d = 1; d <= 100; ++d) {
        c.expect(dimensionality_factor(d, 20 * d) == 1.0, "f(d, 20d) = 1");
        double prev = 2.0;
        for (std::size_t n = 1; n <= 2500; ++n) {
            const double f = dimensionality_factor(d, n);
            c.expect(f >= 1.0 && f <= 1.5, "f in [1, 1.5]");
            // Below ~36 the sigmoid is still < 1 in double precision.
            if (20.0 * double(d) / double(n) - 1.0 < 36.0) c.expect(f < 1.5, "f < 1.5");
            c.expect((f == 1.0) == (n >= 20 * d), "f = 1 exactly from 20d on");
            c.expect(f <= prev, "f nonincreasing in n");
            if (d > 1) c.expect(f >= dimensionality_factor(d - 1, n), "f nondecreasing in d");
            prev = f;
        }
    }
    // normalize_snr: range and monotone.
    double prev = -1.0;
    for (int i = -20000; i <= 60000; ++i) {
        const double v = normalize_snr(i / 1000.0);
        c.expect(v >= 0.0 && v <= 0.5, "normalized SNR in [0, 0.5]");
        c.expect(v >= prev, "normalized SNR nondecreasing");
        prev = v;
    }
    // Group sizes: every vector of 2..3 sizes in 1..6.
    for (std::size_t k = 2; k <= 3; ++k) {
        each_sequence(k, 6, [&](const std::vector<Label>& s0) {
            std::vector<std::size_t> s(s0.size());
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = s0[i] + 1;
            const bool balanced = std::all_of(s.begin(), s.end(), [&](auto v) { return v == s[0]; });
            const double acir = average_class_imbalance_ratio(s);
            const double h = imbalance_adjustment_multiclass(acir);
            c.expect(acir > 0.0 && acir <= 1.0, "ACIR in (0, 1]");
            c.expect(h >= 1.0, "h(ACIR) >= 1");
            c.expect((h == 1.0) == balanced, "h(ACIR) = 1 iff balanced");
            c.expect(cluster_imbalance_adjustment(s) == h, "cluster h matches ACIR form");
            if (k == 2) {
                const double hb = imbalance_adjustment_binary(class_imbalance_ratio(s));
                c.expect(hb >= 1.0 && (hb == 1.0) == balanced, "h(CI) balance identity");
                // Growing the majority never lowers the penalty.
                auto grown = s;
                ++*std::max_element(grown.begin(), grown.end());
                c.expect(imbalance_adjustment_binary(class_imbalance_ratio(grown)) > hb, "h(CI) increasing");
            }
            auto grown = s;
            ++*std::max_element(grown.begin(), grown.end());
            c.expect(imbalance_adjustment_multiclass(average_class_imbalance_ratio(grown)) > h,
                     "h(ACIR) increasing with the majority");
        });
    }
    // Composition: monotone in base, capped.
    for (int i = 0; i <= 100; ++i) {
        const double base = i / 100.0;
        const double v = compose_normalized_metric(base, 1.5, 1.5, 1.0);
        c.expect(v <= 1.0, "cap");
        if (i > 0) c.expect(v >= compose_normalized_metric((i - 1) / 100.0, 1.5, 1.5, 1.0), "monotone in base");
    }
}

Outcome properties() {
    Checker c;
    factor_properties(c);

    std::size_t instances = 0;
    for (std::size_t n = 1; n <= 6; ++n) {
        for (std::size_t k = 2; k <= 3; ++k) {
            each_sequence(n, k, [&](const std::vector<Label>& y) {
                each_sequence(n, k, [&](const std::vector<Label>& yp) {
                    classification_instance(c, y, yp, k, 1 + n % 3, 5 * n);
                    ++instances;
                });
            });
        }
        const double grid[] = {-1.0, 0.0, 2.0};
        each_sequence(n, 3, [&](const std::vector<Label>& a) {
            each_sequence(n, 3, [&](const std::vector<Label>& b) {
                std::vector<double> y(n), yp(n);
                for (std::size_t i = 0; i < n; ++i) {
                    y[i] = grid[a[i]];
                    yp[i] = grid[b[i]];
                }
                regression_instance(c, y, yp);
                ++instances;
            });
        });
    }

    Rng rng(777);
    for (int t = 0; t < 10000; ++t) {
        const std::size_t n = 2 + uniform_index(rng, 60);
        const std::size_t k = 2 + uniform_index(rng, 4);
        std::vector<Label> y(n), yp(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = uniform_index(rng, k);
            yp[i] = unit_uniform(rng) < 0.7 ? y[i] : uniform_index(rng, k);
        }
        classification_instance(c, y, yp, k, 1 + uniform_index(rng, 50), 1 + uniform_index(rng, 2000));
        std::vector<double> ry(n), rp(n);
        for (std::size_t i = 0; i < n; ++i) {
            ry[i] = 10.0 * standard_normal(rng);
            rp[i] = ry[i] + standard_normal(rng);
        }
        regression_instance(c, ry, rp);
        ++instances;
    }
    return c.outcome(std::to_string(instances) + " instances");
}

// ---------------------------------------------------------------------------
// 4. Accuracy paradox

Outcome paradox() {
    EvaluationBundle b;
    b.task = TaskKind::BinaryClassification;
    std::vector<int> truth, pred;
    std::vector<double> prob;
    for (int i = 0; i < 200; ++i) {
        const bool majority = i < 150;
        truth.push_back(majority ? 0 : 1);
        pred.push_back(0);
        prob.push_back(majority ? 1.0 : 0.75);
    }
    b.y_true.assign(truth.begin(), truth.end());
    b.y_pred.assign(pred.begin(), pred.end());
    b.y_prob = prob;
    b.d = 10;
    b.n_train = 200;
    const auto r = evaluate(b);

    const double snr = oracle::snr_binary(truth, pred, prob);
    const double chained = oracle::normalized_metric(0.75, oracle::dim_factor(10, 200),
                                                     oracle::g(oracle::normalized_snr(snr)), oracle::h_ci(150, 50));
    Checker c;
    c.near(r.base, 0.75, 1e-12, "base");
    c.near(r.normalized, chained, 1e-4, "adjusted vs chained reference");
    c.near(r.normalized, 0.70966, 1e-4, "adjusted");
    c.expect(r.normalized < r.base, "adjusted < base");
    return {c.failures == 0 && c.checks > 0,
            c.failures ? c.first : "adjusted " + fmt(r.normalized, 5) + " < base 0.75"};
}

// ---------------------------------------------------------------------------
// 5 and 6. Stability on the synthetic binary generator

constexpr std::size_t kFeatures = 13;
constexpr int kSeeds = 20;

/// 13 informative features, 10% label noise, roughly 70/30 classes.
testdata::LogisticSpec stability_spec() { return {1500, kFeatures, 2.0, 1.0, 0.10}; }

struct StabilityRuns {
    std::vector<std::vector<CurvePoint>> curves;
};

StabilityRuns run_stability() {
    StabilityRuns runs;
    for (int s = 1; s <= kSeeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        const Dataset ds = testdata::logistic_binary(stability_spec(), seed);
        runs.curves.push_back(run_curve(ds, schedule(80, 1000, 20), TaskKind::BinaryClassification, {}, seed));
    }
    return runs;
}

Outcome stability(const StabilityRuns& runs) {
    int wins = 0;
    double mad_initial = 0.0;
    double mad_adjusted = 0.0;
    for (const auto& curve : runs.curves) {
        const auto r = stability_report_for_features(curve, kFeatures);
        wins += r.adjusted.mad_from_target < r.initial.mad_from_target ? 1 : 0;
        mad_initial += r.initial.mad_from_target / kSeeds;
        mad_adjusted += r.adjusted.mad_from_target / kSeeds;
    }
    return {wins >= 14, "adjusted MAD < initial MAD in " + std::to_string(wins) + "/" + std::to_string(kSeeds) +
                            " seeds (need 14); mean MAD initial " + fmt(mad_initial) + ", adjusted " +
                            fmt(mad_adjusted)};
}

Outcome threshold(const StabilityRuns& runs) {
    Checker c;
    for (const auto& curve : runs.curves) {
        for (const auto& p : curve) {
            const double f = p.breakdown.dim_factor_f;
            if (p.train_size >= 20 * kFeatures) {
                c.expect(f == 1.0, "f = 1 at " + std::to_string(p.train_size));
            } else {
                c.expect(f > 1.0, "f > 1 at " + std::to_string(p.train_size));
            }
        }
    }
    return c.outcome("f = 1 exactly from 260 on, > 1 below");
}

// ---------------------------------------------------------------------------
// 7. CLI determinism

int run_cli(std::vector<std::string> args, std::string& out) {
    args.insert(args.begin(), "normetric");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
    out = o.str() + e.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool json_close(const nlohmann::json& a, const nlohmann::json& b, double tol) {
    if (a.is_number() && b.is_number()) return std::abs(a.get<double>() - b.get<double>()) <= tol;
    if (a.is_object() && b.is_object()) {
        if (a.size() != b.size()) return false;
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key()) || !json_close(*it, b[it.key()], tol)) return false;
        }
        return true;
    }
    return a == b;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "normetric_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string data = (dir / "data.csv").string();
    save_csv(data, testdata::logistic_binary({600, 5, 2.0, 0.5, 0.1}, 11));

    Checker c;
    std::string log;
    for (const char* tag : {"a", "b"}) {
        const int code = run_cli({"curve", "--task", "binary", "--data", data, "--target-column", "label", "--start",
                                  "40", "--stop", "400", "--step", "20", "--seed", "7", "--series",
                                  (dir / (std::string("series_") + tag + ".csv")).string(), "--report",
                                  (dir / (std::string("report_") + tag + ".json")).string()},
                                 log);
        c.expect(code == 0, std::string("curve run ") + tag + " exited " + std::to_string(code) + ": " + log);
    }
    if (c.failures) return c.outcome("");
    const std::string series = slurp(dir / "series_a.csv");
    const std::string report = slurp(dir / "report_a.json");
    c.expect(!series.empty() && series == slurp(dir / "series_b.csv"), "series files differ");
    c.expect(!report.empty() && report == slurp(dir / "report_b.json"), "report files differ");

    std::string recomputed;
    const int code = run_cli({"report", "--series", (dir / "series_a.csv").string(), "--d", "5"}, recomputed);
    c.expect(code == 0, "report exited " + std::to_string(code) + ": " + recomputed);
    if (code == 0) {
        c.expect(json_close(nlohmann::json::parse(recomputed), nlohmann::json::parse(report), 1e-12),
                 "recomputed report differs");
    }
    fs::remove_all(dir);
    return c.outcome("byte-identical reruns, report reproduced from series");
}

// ---------------------------------------------------------------------------
// 8. Synthetic expansion

Outcome expansion() {
    // 178 rows, 13 features, three uneven classes.
    const Dataset full = testdata::blobs(60, 3, 13, 3.0, 178, TaskKind::MulticlassClassification);
    std::vector<std::size_t> rows(178);
    std::iota(rows.begin(), rows.end(), 0);
    const Dataset ds = full.subset(rows);
    const auto ex = synthetic_expand_traced(ds, 1000, 5, 42);
    const Dataset& big = ex.data;

    Checker c;
    c.expect(big.n() == 1000, "row count " + std::to_string(big.n()));
    c.expect(ex.origins.size() == 1000 - 178, "origin count");
    bool prefix = big.target.size() >= 178;
    for (Eigen::Index i = 0; prefix && i < 178; ++i) {
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
            prefix = prefix && std::memcmp(&big.features(i, j), &ds.features(i, j), sizeof(double)) == 0;
        }
        prefix = prefix && std::memcmp(&big.target[std::size_t(i)], &ds.target[std::size_t(i)], sizeof(double)) == 0;
    }
    c.expect(prefix, "original rows changed");

    for (std::size_t s = 0; s < ex.origins.size(); ++s) {
        const auto& o = ex.origins[s];
        const auto row = static_cast<Eigen::Index>(178 + s);
        c.expect(o.anchor < 178 && o.neighbor < 178 && o.anchor != o.neighbor, "parents are distinct originals");
        c.expect(o.lambda > 0.0 && o.lambda < 1.0, "lambda in (0, 1)");
        c.expect(ds.target[o.anchor] == ds.target[o.neighbor], "parents share a class");
        c.expect(big.target[std::size_t(row)] == ds.target[o.anchor], "synthetic row keeps the class");
        const auto xa = ds.features.row(static_cast<Eigen::Index>(o.anchor));
        const auto xb = ds.features.row(static_cast<Eigen::Index>(o.neighbor));
        for (Eigen::Index j = 0; j < xa.size(); ++j) {
            const double v = big.features(row, j);
            const double expect = xa(j) + o.lambda * (xb(j) - xa(j));
            c.expect(std::abs(v - expect) <= 1e-12 * std::max(1.0, std::abs(expect)), "convex combination");
            const double slack = 1e-12 * std::max({1.0, std::abs(xa(j)), std::abs(xb(j))});
            c.expect(v >= std::min(xa(j), xb(j)) - slack && v <= std::max(xa(j), xb(j)) + slack, "between parents");
        }
    }
    return c.outcome("178 -> 1000 rows");
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

} // namespace

int main() {
    StabilityRuns runs;
    double runs_seconds = 0.0;
    const std::vector<Criterion> criteria{
        {1, "anchors", 1.0, anchors},
        {2, "transcription oracle", 10.0, transcription},
        {3, "property suite", 30.0, properties},
        {4, "accuracy paradox", 1.0, paradox},
        {5, "stability sign test", 120.0,
         [&] {
             const auto t0 = std::chrono::steady_clock::now();
             runs = run_stability();
             runs_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
             return stability(runs);
         }},
        {6, "threshold semantics", 120.0, [&] { return threshold(runs); }},
        {7, "end-to-end determinism", 60.0, determinism},
        {8, "synthetic expansion", 10.0, expansion},
    };

    int failed = 0;
    for (const auto& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.id == 6) seconds += runs_seconds;
        if (seconds > cr.budget_seconds) {
            o.pass = false;
            o.detail += "; over budget " + fmt(cr.budget_seconds, 0) + " s";
        }
        std::printf("[%s] %d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, seconds, o.detail.c_str());
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
