#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rejectlab/core.hpp"

namespace rejectlab {

/// Labeled samples with classes enumerated 1..Z. `positive_class` marks the
/// class that precision/recall refer to.
struct Dataset {
    std::vector<FeatureVector> X;
    std::vector<int> y;                    // in 1..num_classes
    int num_classes = 0;
    std::vector<std::string> class_names;  // original labels, index c-1; may be empty
    int positive_class = 1;

    std::size_t size() const { return X.size(); }
    std::size_t dim() const { return X.empty() ? 0 : X.front().size(); }

    std::vector<long> class_counts() const {
        std::vector<long> counts(static_cast<std::size_t>(num_classes), 0);
        for (int label : y) counts[static_cast<std::size_t>(label - 1)]++;
        return counts;
    }

    /// Smallest class, ties broken toward the lower label.
    int minority_class() const {
        auto counts = class_counts();
        int best = 1;
        for (int c = 2; c <= num_classes; ++c)
            if (counts[static_cast<std::size_t>(c - 1)] < counts[static_cast<std::size_t>(best - 1)])
                best = c;
        return best;
    }

    void validate() const {
        if (X.empty() || X.size() != y.size())
            throw std::invalid_argument("Dataset: needs |X| = |y| >= 1");
        if (num_classes < 2) throw std::invalid_argument("Dataset: needs at least 2 classes");
        if (positive_class < 1 || positive_class > num_classes)
            throw std::invalid_argument("Dataset: positive_class out of range");
        std::size_t d = X.front().size();
        for (const auto& x : X) {
            if (x.size() != d) throw std::invalid_argument("Dataset: inconsistent dimensionality");
            if (!all_finite(x)) throw std::invalid_argument("Dataset: non-finite feature value");
        }
        for (int label : y)
            if (label < 1 || label > num_classes)
                throw std::invalid_argument("Dataset: label out of range");
    }
};

inline Dataset subset(const Dataset& d, const std::vector<int>& indices) {
    Dataset out;
    out.num_classes = d.num_classes;
    out.class_names = d.class_names;
    out.positive_class = d.positive_class;
    out.X.reserve(indices.size());
    out.y.reserve(indices.size());
    for (int i : indices) {
        out.X.push_back(d.X[static_cast<std::size_t>(i)]);
        out.y.push_back(d.y[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// Per-feature z-score transform fitted on one dataset (population std) and
/// applicable to another, so held-out folds are scaled with training statistics.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // 0 marks a constant feature; apply() maps those to 0

    static Standardizer fit(const Dataset& d) {
        d.validate();
        std::size_t n = d.size(), dim = d.dim();
        Standardizer s;
        s.mean.assign(dim, 0.0);
        s.stddev.assign(dim, 0.0);
        for (const auto& x : d.X)
            for (std::size_t j = 0; j < dim; ++j) s.mean[j] += x[j];
        for (std::size_t j = 0; j < dim; ++j) s.mean[j] /= static_cast<double>(n);
        for (const auto& x : d.X)
            for (std::size_t j = 0; j < dim; ++j) {
                double c = x[j] - s.mean[j];
                s.stddev[j] += c * c;
            }
        for (std::size_t j = 0; j < dim; ++j) {
            double var = s.stddev[j] / static_cast<double>(n);
            s.stddev[j] = var > 1e-24 ? std::sqrt(var) : 0.0;
        }
        return s;
    }

    FeatureVector apply(const FeatureVector& x) const {
        if (x.size() != mean.size())
            throw std::invalid_argument("Standardizer::apply: dimension mismatch");
        FeatureVector out(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            out[j] = stddev[j] > 0.0 ? (x[j] - mean[j]) / stddev[j] : 0.0;
        return out;
    }

    Dataset apply(const Dataset& d) const {
        Dataset out = d;
        for (auto& x : out.X) x = apply(x);
        return out;
    }
};

inline std::pair<Dataset, Standardizer> standardize(const Dataset& d) {
    Standardizer s = Standardizer::fit(d);
    return {s.apply(d), s};
}

/// One diagonal Gaussian per class plus a shared uniform-noise component.
struct ClassGaussian {
    FeatureVector mean;
    FeatureVector stddev;
};

struct GaussianSpec {
    std::vector<ClassGaussian> classes;
    double noise_fraction = 0.05;  // share of each class replaced by box noise
    FeatureVector box_min;         // empty -> derived from the classes
    FeatureVector box_max;
    int samples_per_class = 1000;

    std::size_t dim() const { return classes.empty() ? 0 : classes.front().mean.size(); }

    void validate() const {
        if (classes.size() < 2) throw std::invalid_argument("GaussianSpec: needs >= 2 classes");
        std::size_t d = dim();
        if (d == 0) throw std::invalid_argument("GaussianSpec: empty mean");
        for (const auto& c : classes) {
            if (c.mean.size() != d || c.stddev.size() != d)
                throw std::invalid_argument("GaussianSpec: inconsistent dimensions");
            if (!all_finite(c.mean) || !all_finite(c.stddev))
                throw std::invalid_argument("GaussianSpec: non-finite parameter");
            for (double s : c.stddev)
                if (!(s > 0.0)) throw std::invalid_argument("GaussianSpec: stddev must be > 0");
        }
        if (!(noise_fraction >= 0.0 && noise_fraction < 1.0))
            throw std::invalid_argument("GaussianSpec: noise_fraction must be in [0,1)");
        if (samples_per_class < 1)
            throw std::invalid_argument("GaussianSpec: samples_per_class must be >= 1");
        if (!box_min.empty() || !box_max.empty()) {
            if (box_min.size() != d || box_max.size() != d)
                throw std::invalid_argument("GaussianSpec: noise box dimension mismatch");
            for (std::size_t j = 0; j < d; ++j)
                if (!(box_max[j] > box_min[j]))
                    throw std::invalid_argument("GaussianSpec: noise box must have positive extent");
        }
    }

    /// Union of the per-class [mean - 3 std, mean + 3 std] ranges.
    std::pair<FeatureVector, FeatureVector> noise_box() const {
        if (!box_min.empty()) return {box_min, box_max};
        std::size_t d = dim();
        FeatureVector lo(d, std::numeric_limits<double>::infinity());
        FeatureVector hi(d, -std::numeric_limits<double>::infinity());
        for (const auto& c : classes)
            for (std::size_t j = 0; j < d; ++j) {
                lo[j] = std::min(lo[j], c.mean[j] - 3.0 * c.stddev[j]);
                hi[j] = std::max(hi[j], c.mean[j] + 3.0 * c.stddev[j]);
            }
        return {lo, hi};
    }
};

/// Two overlapping anisotropic 2D classes; the default synthetic benchmark.
inline GaussianSpec default_gaussian_spec() {
    GaussianSpec spec;
    spec.classes = {{{-4.0, 4.5}, {5.2, 7.1}}, {{4.0, 0.5}, {2.5, 2.1}}};
    spec.noise_fraction = 0.05;
    spec.samples_per_class = 1000;
    return spec;
}

/// Equal class sizes; within each class the first floor(noise_fraction * n)
/// samples are uniform draws over the noise box, keeping the class label.
inline Dataset generate_gaussians(const GaussianSpec& spec, std::uint64_t seed) {
    spec.validate();
    auto [lo, hi] = spec.noise_box();
    std::size_t d = spec.dim();
    int n = spec.samples_per_class;
    int noise_count = static_cast<int>(spec.noise_fraction * n);

    Dataset out;
    out.num_classes = static_cast<int>(spec.classes.size());
    std::mt19937_64 rng(mix_seed(seed, 0x6761757373ULL));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int c = 0; c < out.num_classes; ++c) {
        const auto& g = spec.classes[static_cast<std::size_t>(c)];
        for (int i = 0; i < n; ++i) {
            FeatureVector x(d);
            if (i < noise_count) {
                for (std::size_t j = 0; j < d; ++j) x[j] = lo[j] + (hi[j] - lo[j]) * unit(rng);
            } else {
                for (std::size_t j = 0; j < d; ++j) x[j] = g.mean[j] + g.stddev[j] * gauss(rng);
            }
            out.X.push_back(std::move(x));
            out.y.push_back(c + 1);
        }
    }
    out.positive_class = out.minority_class();
    out.validate();
    return out;
}

/// Stratified k-fold assignments for several independent repeats.
struct FoldPlan {
    int k = 0;
    int repeats = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> assignment;  // [repeat][sample] -> fold in 0..k-1

    std::vector<int> test_indices(int repeat, int fold) const {
        std::vector<int> idx;
        const auto& a = assignment[static_cast<std::size_t>(repeat)];
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] == fold) idx.push_back(static_cast<int>(i));
        return idx;
    }

    std::vector<int> train_indices(int repeat, int fold) const {
        std::vector<int> idx;
        const auto& a = assignment[static_cast<std::size_t>(repeat)];
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != fold) idx.push_back(static_cast<int>(i));
        return idx;
    }
};

/// Shuffles each class separately, deals base quotas to every fold and sends
/// the remainders to the currently smallest folds, so per-class counts differ
/// by at most one between folds and so do total fold sizes.
inline FoldPlan make_fold_plan(const Dataset& d, int k, int repeats, std::uint64_t seed) {
    d.validate();
    if (k < 2) throw std::invalid_argument("make_fold_plan: k must be >= 2");
    if (repeats < 1) throw std::invalid_argument("make_fold_plan: repeats must be >= 1");
    auto counts = d.class_counts();
    for (int c = 1; c <= d.num_classes; ++c)
        if (counts[static_cast<std::size_t>(c - 1)] < k)
            throw std::invalid_argument("make_fold_plan: class " + std::to_string(c) + " has " +
                                        std::to_string(counts[static_cast<std::size_t>(c - 1)]) +
                                        " samples, fewer than k=" + std::to_string(k));

    FoldPlan plan;
    plan.k = k;
    plan.repeats = repeats;
    plan.seed = seed;
    plan.assignment.assign(static_cast<std::size_t>(repeats),
                           std::vector<int>(d.size(), -1));

    for (int rep = 0; rep < repeats; ++rep) {
        auto& assign = plan.assignment[static_cast<std::size_t>(rep)];
        std::vector<long> fold_sizes(static_cast<std::size_t>(k), 0);
        for (int c = 1; c <= d.num_classes; ++c) {
            std::vector<int> members;
            for (std::size_t i = 0; i < d.y.size(); ++i)
                if (d.y[i] == c) members.push_back(static_cast<int>(i));
            std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(rep),
                                         static_cast<std::uint64_t>(c)));
            std::shuffle(members.begin(), members.end(), rng);

            long base = static_cast<long>(members.size()) / k;
            int extras = static_cast<int>(static_cast<long>(members.size()) % k);
            // folds ordered by current size (ties by index) receive the extras
            std::vector<int> order(static_cast<std::size_t>(k));
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return fold_sizes[static_cast<std::size_t>(a)] <
                                                        fold_sizes[static_cast<std::size_t>(b)]; });
            std::vector<long> quota(static_cast<std::size_t>(k), base);
            for (int e = 0; e < extras; ++e) quota[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])]++;

            std::size_t next = 0;
            for (int f = 0; f < k; ++f) {
                for (long q = 0; q < quota[static_cast<std::size_t>(f)]; ++q)
                    assign[static_cast<std::size_t>(members[next++])] = f;
                fold_sizes[static_cast<std::size_t>(f)] += quota[static_cast<std::size_t>(f)];
            }
        }
    }
    return plan;
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

inline std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') ++begin;  // from_chars does not eat a leading plus
    double v = 0.0;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

/// Loads a comma-separated file with one header row. `label_column` is either a
/// header name or a 0-based column index. Labels are remapped to 1..Z in order
/// of first appearance; the original spellings are kept as class_names.
/// `positive_label` is matched against the original spelling; when empty the
/// minority class becomes the positive one.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        const std::string& positive_label = "") {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("load_csv: '" + path + "' is empty");
    auto header = detail::split_csv_line(line);

    int label_idx = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == label_column) label_idx = static_cast<int>(j);
    if (label_idx < 0) {
        // fall back to a numeric column index
        try {
            std::size_t pos = 0;
            int idx = std::stoi(label_column, &pos);
            if (pos == label_column.size() && idx >= 0 && idx < static_cast<int>(header.size()))
                label_idx = idx;
        } catch (const std::exception&) {
        }
    }
    if (label_idx < 0)
        throw std::invalid_argument("load_csv: label column '" + label_column +
                                    "' not found in header of '" + path + "'");

    Dataset out;
    std::vector<std::string> label_order;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("load_csv: line " + std::to_string(line_no) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        FeatureVector x;
        x.reserve(header.size() - 1);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (static_cast<int>(j) == label_idx) continue;
            auto v = detail::parse_double(cells[j]);
            if (!v)
                throw std::invalid_argument("load_csv: non-numeric value '" + cells[j] +
                                            "' at line " + std::to_string(line_no) +
                                            ", column '" + header[j] + "'");
            x.push_back(*v);
        }
        const std::string& label = cells[static_cast<std::size_t>(label_idx)];
        auto it = std::find(label_order.begin(), label_order.end(), label);
        int mapped;
        if (it == label_order.end()) {
            label_order.push_back(label);
            mapped = static_cast<int>(label_order.size());
        } else {
            mapped = static_cast<int>(it - label_order.begin()) + 1;
        }
        out.X.push_back(std::move(x));
        out.y.push_back(mapped);
    }

    if (out.X.empty()) throw std::invalid_argument("load_csv: '" + path + "' has no data rows");
    if (label_order.size() < 2)
        throw std::invalid_argument("load_csv: '" + path + "' contains a single class '" +
                                    (label_order.empty() ? "" : label_order.front()) + "'");
    out.num_classes = static_cast<int>(label_order.size());
    out.class_names = label_order;

    if (!positive_label.empty()) {
        auto it = std::find(label_order.begin(), label_order.end(), positive_label);
        if (it == label_order.end())
            throw std::invalid_argument("load_csv: positive class '" + positive_label +
                                        "' does not occur in '" + path + "'");
        out.positive_class = static_cast<int>(it - label_order.begin()) + 1;
    } else {
        out.positive_class = out.minority_class();
    }
    out.validate();
    return out;
}

/// Writes a dataset in the same shape load_csv expects (features f1..fn plus a
/// label column holding the class name, or the 1..Z index when names are absent).
inline void write_csv(std::ostream& os, const Dataset& d, const std::string& label_column = "label") {
    for (std::size_t j = 0; j < d.dim(); ++j) os << 'f' << (j + 1) << ',';
    os << label_column << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (double v : d.X[i]) os << format_double(v) << ',';
        int label = d.y[i];
        if (!d.class_names.empty())
            os << d.class_names[static_cast<std::size_t>(label - 1)];
        else
            os << label;
        os << '\n';
    }
}

inline void write_csv_file(const std::string& path, const Dataset& d,
                           const std::string& label_column = "label") {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_csv_file: cannot write '" + path + "'");
    write_csv(os, d, label_column);
}

}  // namespace rejectlab
