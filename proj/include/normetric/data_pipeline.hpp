#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "normetric/errors.hpp"
#include "normetric/learners.hpp"
#include "normetric/metric_core.hpp"
#include "normetric/random.hpp"

namespace normetric {

/// Tabular data with one target column.
///
/// For class-valued tasks `target` holds contiguous class indices and
/// `class_names` the original spelling of each class.
struct Dataset {
    std::vector<std::string> feature_names;
    std::string target_name = "target";
    Matrix features;
    std::vector<double> target;
    TaskKind task = TaskKind::Regression;
    std::vector<std::string> class_names;

    std::size_t n() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t d() const { return static_cast<std::size_t>(features.cols()); }

    std::size_t class_count() const {
        if (!class_names.empty()) {
            return class_names.size();
        }
        double m = -1.0;
        for (double t : target) {
            m = std::max(m, t);
        }
        return static_cast<std::size_t>(m + 1.0);
    }

    std::vector<Label> labels() const { return to_labels(target, "dataset target"); }

    /// Rows picked by index, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const {
        Dataset out;
        out.feature_names = feature_names;
        out.target_name = target_name;
        out.task = task;
        out.class_names = class_names;
        out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
        out.target.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
            out.target[i] = target[rows[i]];
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// CSV

namespace csv {

/// Splits one record; handles quoted fields with doubled quotes. Quoted
/// fields may span lines, so the caller hands in the stream.
inline bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    char ch = 0;
    while (in.get(ch)) {
        any = true;
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    if (!any) {
        return false;
    }
    fields.push_back(std::move(field));
    return true;
}

inline std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out += '"';
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

/// Parses a finite real; rejects trailing garbage.
inline std::optional<double> parse_real(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) {
        return std::nullopt;
    }
    const char* first = s.data();
    if (*first == '+') {
        ++first;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

inline bool is_missing(const std::string& raw) {
    const std::string s = trim(raw);
    return s.empty() || s == "NA" || s == "N/A" || s == "NaN" || s == "nan" || s == "?" || s == "null";
}

/// Shortest text that reads back to the same double.
inline std::string format_real(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace csv

struct LoadedDataset {
    Dataset data;
    std::size_t dropped_rows = 0;
};

/// Reads a headered CSV.
///
/// A column counts as numeric when most of its non-missing cells parse as
/// reals; other columns are label-encoded in order of first appearance.
/// Rows with a missing cell, a non-numeric cell in a numeric column, or the
/// wrong field count are dropped and counted.
inline LoadedDataset read_csv(std::istream& in, const std::string& target_column, TaskKind task) {
    std::vector<std::string> header;
    if (!csv::read_record(in, header)) {
        throw EmptyDataError("CSV has no header row");
    }
    for (auto& h : header) {
        h = csv::trim(h);
    }
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        header[0].erase(0, 3);
    }
    const auto target_it = std::find(header.begin(), header.end(), target_column);
    if (target_it == header.end()) {
        throw MissingColumnError("target column '" + target_column + "' not found in header");
    }
    const auto target_col = static_cast<std::size_t>(target_it - header.begin());
    const std::size_t cols = header.size();

    std::vector<std::vector<std::string>> rows;
    std::size_t dropped = 0;
    std::vector<std::string> rec;
    while (csv::read_record(in, rec)) {
        if (rec.size() == 1 && csv::trim(rec[0]).empty()) {
            continue;
        }
        if (rec.size() != cols) {
            ++dropped;
            continue;
        }
        rows.push_back(rec);
    }

    // Column typing by majority vote over non-missing cells.
    std::vector<bool> numeric(cols, true);
    for (std::size_t c = 0; c < cols; ++c) {
        std::size_t parsed = 0;
        std::size_t present = 0;
        for (const auto& r : rows) {
            if (csv::is_missing(r[c])) {
                continue;
            }
            ++present;
            parsed += csv::parse_real(r[c]).has_value() ? 1 : 0;
        }
        numeric[c] = present == 0 || 2 * parsed > present;
    }
    if (task == TaskKind::Regression && !numeric[target_col]) {
        throw DataError("regression target column '" + target_column + "' is not numeric");
    }

    std::vector<const std::vector<std::string>*> kept;
    for (const auto& r : rows) {
        bool ok = true;
        for (std::size_t c = 0; c < cols && ok; ++c) {
            ok = !csv::is_missing(r[c]) && (!numeric[c] || csv::parse_real(r[c]).has_value());
        }
        if (ok) {
            kept.push_back(&r);
        } else {
            ++dropped;
        }
    }
    if (kept.empty()) {
        throw EmptyDataError("CSV contains no usable rows");
    }

    LoadedDataset out;
    out.dropped_rows = dropped;
    Dataset& ds = out.data;
    ds.task = task;
    ds.target_name = target_column;
    for (std::size_t c = 0; c < cols; ++c) {
        if (c != target_col) {
            ds.feature_names.push_back(header[c]);
        }
    }
    ds.features.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(cols - 1));
    ds.target.resize(kept.size());

    std::vector<std::unordered_map<std::string, double>> codes(cols);
    const bool class_target = has_class_targets(task);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto& r = *kept[i];
        Eigen::Index out_col = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            const std::string cell = csv::trim(r[c]);
            double value = 0.0;
            if (c == target_col && class_target) {
                auto [it, inserted] = codes[c].try_emplace(cell, static_cast<double>(codes[c].size()));
                if (inserted) {
                    ds.class_names.push_back(cell);
                }
                value = it->second;
            } else if (numeric[c]) {
                value = *csv::parse_real(cell);
            } else {
                value = codes[c].try_emplace(cell, static_cast<double>(codes[c].size())).first->second;
            }
            if (c == target_col) {
                ds.target[i] = value;
            } else {
                ds.features(static_cast<Eigen::Index>(i), out_col++) = value;
            }
        }
    }
    return out;
}

inline LoadedDataset load_csv(const std::string& path, const std::string& target_column, TaskKind task) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileError("cannot open '" + path + "'");
    }
    return read_csv(in, target_column, task);
}

/// Features in their original order followed by the target column.
/// Class targets are written by class name when names are known.
inline void write_csv(std::ostream& out, const Dataset& ds) {
    for (const auto& name : ds.feature_names) {
        out << csv::quote(name) << ',';
    }
    out << csv::quote(ds.target_name) << '\n';
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t c = 0; c < ds.d(); ++c) {
            out << csv::format_real(ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c))) << ',';
        }
        const double t = ds.target[i];
        if (has_class_targets(ds.task) && !ds.class_names.empty()) {
            out << csv::quote(ds.class_names[static_cast<std::size_t>(t)]);
        } else {
            out << csv::format_real(t);
        }
        out << '\n';
    }
}

inline void save_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FileError("cannot write '" + path + "'");
    }
    write_csv(out, ds);
}

// ---------------------------------------------------------------------------
// Splitting

struct Split {
    Dataset train;
    Dataset test;
};

/// Seeded shuffle, then the first floor(n * test_fraction) rows go to the
/// test side. Class-valued datasets are stratified when every class has at
/// least two rows: each class contributes its largest-remainder share.
inline Split split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw DomainError("split: test fraction must lie in (0, 1)");
    }
    const std::size_t n = ds.n();
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
    if (n_test < 1 || n_test >= n) {
        throw DomainError("split: " + std::to_string(n) + " rows cannot be split with fraction " +
                          std::to_string(test_fraction));
    }

    Rng rng(seed);
    const auto order = permutation(n, rng);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;

    bool stratify = has_class_targets(ds.task);
    std::vector<std::size_t> sizes;
    std::vector<Label> labels;
    if (stratify) {
        labels = ds.labels();
        sizes = label_counts(labels, ds.class_count());
        stratify = std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 0 || s >= 2; });
    }

    if (!stratify) {
        test_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    } else {
        std::vector<std::size_t> quota(sizes.size());
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < sizes.size(); ++c) {
            const double exact = static_cast<double>(sizes[c]) * static_cast<double>(n_test) / static_cast<double>(n);
            quota[c] = static_cast<std::size_t>(std::floor(exact));
            assigned += quota[c];
            remainders.emplace_back(exact - std::floor(exact), c);
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; assigned < n_test; ++i) {
            ++quota[remainders[i % remainders.size()].second];
            ++assigned;
        }
        for (auto row : order) {
            auto& q = quota[labels[row]];
            if (q > 0) {
                --q;
                test_rows.push_back(row);
            } else {
                train_rows.push_back(row);
            }
        }
    }
    return {ds.subset(train_rows), ds.subset(test_rows)};
}

// ---------------------------------------------------------------------------
// Schedules

struct SampleSchedule {
    std::size_t start = 0;
    std::size_t stop = 0;
    std::size_t step = 0;
    std::vector<std::size_t> sizes;
};

/// start, start + step, ... up to and including stop when it is reached.
inline SampleSchedule schedule(std::size_t start, std::size_t stop, std::size_t step) {
    if (start < 1 || start > stop || step < 1) {
        throw DomainError("schedule: need 1 <= start <= stop and step >= 1");
    }
    SampleSchedule s{start, stop, step, {}};
    for (std::size_t m = start; m <= stop; m += step) {
        s.sizes.push_back(m);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Synthetic expansion

/// Provenance of a synthetic row: anchor + lambda * (neighbor - anchor).
struct SyntheticOrigin {
    std::size_t anchor = 0;
    std::size_t neighbor = 0;
    double lambda = 0.0;
};

struct Expansion {
    Dataset data;
    /// One entry per synthetic row, i.e. rows ds.n() .. target_n - 1.
    std::vector<SyntheticOrigin> origins;
};

/// Grows `ds` to `target_n` rows by interpolating between a random original
/// row and one of its k nearest original neighbors. Class-valued datasets
/// only pair rows of the same class. Original rows come first, unchanged.
inline Expansion synthetic_expand_traced(const Dataset& ds, std::size_t target_n, std::size_t k_neighbors,
                                         std::uint64_t seed) {
    const std::size_t n = ds.n();
    if (target_n <= n) {
        throw DomainError("synthetic_expand: target size must exceed the current " + std::to_string(n) + " rows");
    }
    if (k_neighbors < 1 || k_neighbors >= n) {
        throw DomainError("synthetic_expand: k_neighbors must lie in [1, n)");
    }

    const bool by_class = has_class_targets(ds.task);
    std::vector<std::vector<std::size_t>> neighbors(n);
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || (by_class && ds.target[j] != ds.target[i])) {
                continue;
            }
            const double dist = (ds.features.row(static_cast<Eigen::Index>(i)) -
                                 ds.features.row(static_cast<Eigen::Index>(j)))
                                    .squaredNorm();
            cand.emplace_back(dist, j);
        }
        const std::size_t take = std::min(k_neighbors, cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
        for (std::size_t t = 0; t < take; ++t) {
            neighbors[i].push_back(cand[t].second);
        }
    }

    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < n; ++i) {
        if (!neighbors[i].empty()) {
            anchors.push_back(i);
        }
    }
    if (anchors.empty()) {
        throw DomainError("synthetic_expand: no row has a same-class neighbor");
    }

    Expansion out;
    Dataset& big = out.data;
    big.feature_names = ds.feature_names;
    big.target_name = ds.target_name;
    big.task = ds.task;
    big.class_names = ds.class_names;
    big.features.resize(static_cast<Eigen::Index>(target_n), ds.features.cols());
    big.features.topRows(static_cast<Eigen::Index>(n)) = ds.features;
    big.target = ds.target;
    big.target.resize(target_n);

    Rng rng(seed);
    for (std::size_t row = n; row < target_n; ++row) {
        const std::size_t a = anchors[uniform_index(rng, anchors.size())];
        const std::size_t b = neighbors[a][uniform_index(rng, neighbors[a].size())];
        const double lambda = open_unit_uniform(rng);
        const auto xa = ds.features.row(static_cast<Eigen::Index>(a));
        const auto xb = ds.features.row(static_cast<Eigen::Index>(b));
        big.features.row(static_cast<Eigen::Index>(row)) = xa + lambda * (xb - xa);
        big.target[row] = ds.target[a];
        out.origins.push_back({a, b, lambda});
    }
    return out;
}

inline Dataset synthetic_expand(const Dataset& ds, std::size_t target_n, std::size_t k_neighbors,
                                std::uint64_t seed) {
    return synthetic_expand_traced(ds, target_n, k_neighbors, seed).data;
}

} // namespace normetric
