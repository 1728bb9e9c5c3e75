#include "breglr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace breglr {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\"");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\"");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string_view rest(line);
    while (true) {
        const auto comma = rest.find(',');
        cells.emplace_back(trim(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return cells;
}

std::optional<double> parse_number(std::string_view cell) {
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

bool is_feature_column(int col, const CsvOptions& opt) {
    return col != opt.label_column && !(opt.group_column && col == *opt.group_column);
}

// Portable draws from a 64-bit engine so synthetic data does not depend on
// the standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(bound)) % bound;
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t k = items.size(); k > 1; --k) {
        std::swap(items[k - 1], items[uniform_index(rng, k)]);
    }
}

}  // namespace

Vector FeatureScaling::apply(const Vector& raw) const {
    if (raw.size() != raw_dims()) {
        throw std::invalid_argument("FeatureScaling::apply: instance has wrong dimension");
    }
    Vector h(output_dims());
    for (Index j = 0; j < raw_dims(); ++j) {
        double x = 0.0;
        if (!constant[j]) {
            x = 2.0 * (raw[j] - min[j]) / (max[j] - min[j]) - 1.0;
            x = std::clamp(x, -1.0, 1.0);
        }
        h[j] = x;
    }
    if (intercept) h[raw_dims()] = 1.0;
    if (mode == ColumnNormalization::UniformDivisor) {
        h /= divisor;
    } else {
        const double total = h.lpNorm<1>();
        if (total > 0.0) h /= total;
    }
    return h;
}

Vector FeatureScaling::invert(const Vector& scaled) const {
    if (scaled.size() != output_dims()) {
        throw std::invalid_argument("FeatureScaling::invert: vector has wrong dimension");
    }
    if (mode != ColumnNormalization::UniformDivisor) {
        throw std::logic_error("FeatureScaling::invert: only defined for uniform scaling");
    }
    Vector raw(raw_dims());
    for (Index j = 0; j < raw_dims(); ++j) {
        if (constant[j]) {
            raw[j] = min[j];
        } else {
            const double unit = scaled[j] * divisor;
            raw[j] = min[j] + 0.5 * (unit + 1.0) * (max[j] - min[j]);
        }
    }
    return raw;
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
    Dataset out;
    out.name = name;
    out.feature_names = feature_names;
    out.scale_record = scale_record;
    out.features.resize(static_cast<Index>(rows.size()), dims());
    out.labels.resize(static_cast<Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Index r = rows[k];
        out.features.row(static_cast<Index>(k)) = features.row(r);
        out.labels[static_cast<Index>(k)] = labels[r];
        if (!groups.empty()) out.groups.push_back(groups[static_cast<std::size_t>(r)]);
    }
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(split_line(line));
    }
    if (rows.empty()) throw DataError(path.string() + ": file is empty");

    const int width = static_cast<int>(rows.front().size());
    if (options.label_column < 0 || options.label_column >= width) {
        throw DataError(path.string() + ": label column out of range");
    }
    if (options.group_column && (*options.group_column < 0 || *options.group_column >= width ||
                                 *options.group_column == options.label_column)) {
        throw DataError(path.string() + ": group column out of range");
    }

    bool header = false;
    if (options.header) {
        header = *options.header;
    } else {
        for (int c = 0; c < width; ++c) {
            if (is_feature_column(c, options) && !parse_number(rows.front()[c])) header = true;
        }
    }

    Dataset ds;
    ds.name = path.stem().string();
    for (int c = 0; c < width; ++c) {
        if (!is_feature_column(c, options)) continue;
        ds.feature_names.push_back(header ? rows.front()[c] : "x" + std::to_string(ds.feature_names.size()));
    }
    const Index n = static_cast<Index>(ds.feature_names.size());
    if (n == 0) throw DataError(path.string() + ": no feature columns");

    std::vector<std::vector<double>> values;
    std::vector<std::string> tokens;
    std::set<std::string> distinct;
    for (std::size_t r = header ? 1 : 0; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (static_cast<int>(cells.size()) != width) {
            ++ds.rejected_rows;
            continue;
        }
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(n));
        bool ok = true;
        for (int c = 0; c < width && ok; ++c) {
            if (!is_feature_column(c, options)) continue;
            const auto v = parse_number(cells[c]);
            if (v) {
                row.push_back(*v);
            } else {
                ok = false;
            }
        }
        const std::string& label = cells[options.label_column];
        if (!ok || label.empty()) {
            ++ds.rejected_rows;
            continue;
        }
        distinct.insert(label);
        if (distinct.size() > 2) {
            throw DataError(path.string() + ": label column has more than two distinct values");
        }
        values.push_back(std::move(row));
        tokens.push_back(label);
        if (options.group_column) ds.groups.push_back(cells[*options.group_column]);
    }
    if (values.empty()) throw DataError(path.string() + ": no usable rows");
    if (distinct.size() == 2 && !distinct.contains(options.positive_label)) {
        throw DataError(path.string() + ": positive label '" + options.positive_label +
                        "' not present");
    }

    const Index m = static_cast<Index>(values.size());
    ds.features.resize(m, n);
    ds.labels.resize(m);
    for (Index i = 0; i < m; ++i) {
        const auto& row = values[static_cast<std::size_t>(i)];
        for (Index j = 0; j < n; ++j) ds.features(i, j) = row[static_cast<std::size_t>(j)];
        ds.labels[i] = tokens[static_cast<std::size_t>(i)] == options.positive_label ? 1 : -1;
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    const bool grouped = !ds.groups.empty();
    out << "label";
    if (grouped) out << ",group";
    for (Index j = 0; j < ds.dims(); ++j) {
        const auto k = static_cast<std::size_t>(j);
        out << ',' << (k < ds.feature_names.size() ? ds.feature_names[k] : "x" + std::to_string(j));
    }
    out << '\n';
    char buf[32];
    for (Index i = 0; i < ds.instances(); ++i) {
        out << ds.labels[i];
        if (grouped) out << ',' << ds.groups[static_cast<std::size_t>(i)];
        for (Index j = 0; j < ds.dims(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), ds.features(i, j));
            out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

FeatureScaling fit_scaling(const Dataset& train, const NormalizeOptions& options) {
    const Index n = train.dims();
    if (n < 1) throw DataError("normalize: dataset has no features");
    if (train.instances() < 1) throw DataError("normalize: dataset has no instances");
    FeatureScaling sc;
    sc.min = train.features.colwise().minCoeff().transpose();
    sc.max = train.features.colwise().maxCoeff().transpose();
    sc.constant.resize(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) sc.constant[static_cast<std::size_t>(j)] = !(sc.max[j] > sc.min[j]);
    sc.intercept = options.intercept;
    sc.mode = options.mode;
    sc.divisor = static_cast<double>(n + 1);
    return sc;
}

ConstraintMatrix constraint_matrix(const Dataset& ds, const FeatureScaling& scaling) {
    const Index m = ds.instances();
    Matrix h(scaling.output_dims(), m);
    for (Index i = 0; i < m; ++i) h.col(i) = scaling.apply(ds.features.row(i).transpose());
    std::optional<Index> intercept_row;
    if (scaling.intercept) intercept_row = scaling.raw_dims();
    Vector scale(scaling.output_dims());
    for (Index j = 0; j < scaling.raw_dims(); ++j) {
        const double range = scaling.max[j] - scaling.min[j];
        scale[j] = scaling.constant[static_cast<std::size_t>(j)] ? 1.0 / scaling.divisor
                                                              : 2.0 / (range * scaling.divisor);
    }
    if (scaling.intercept) scale[scaling.raw_dims()] = 1.0 / scaling.divisor;
    return ConstraintMatrix(h, ds.labels, scale, intercept_row);
}

Normalized normalize(const Dataset& ds, const NormalizeOptions& options) {
    const FeatureScaling scaling = fit_scaling(ds, options);
    ConstraintMatrix a = constraint_matrix(ds, scaling);
    Dataset scaled = ds;
    scaled.features.resize(ds.instances(), scaling.output_dims());
    for (Index i = 0; i < ds.instances(); ++i) {
        scaled.features.row(i) = scaling.apply(ds.features.row(i).transpose()).transpose();
    }
    scaled.feature_names = ds.feature_names;
    if (scaling.intercept) scaled.feature_names.emplace_back("intercept");
    scaled.scale_record = scaling;
    return Normalized{std::move(scaled), std::move(a)};
}

SynthData synth_hyperplane(const SynthOptions& opt) {
    if (opt.dim < 1) throw std::invalid_argument("synth: dim must be at least 1");
    if (opt.m_train < 1 || opt.m_test < 0) throw std::invalid_argument("synth: bad sample sizes");
    if (!(opt.noise_sigma >= 0.0 && opt.noise_sigma < 1.0)) {
        throw std::invalid_argument("synth: noise sigma must lie in [0, 1)");
    }
    if (opt.informative < 0 || opt.informative > opt.dim) {
        throw std::invalid_argument("synth: informative dims out of range");
    }
    std::mt19937_64 rng(opt.seed);

    std::vector<Index> dims(static_cast<std::size_t>(opt.dim));
    for (Index j = 0; j < opt.dim; ++j) dims[static_cast<std::size_t>(j)] = j;
    shuffle(dims, rng);
    const Index k = opt.informative == 0 ? opt.dim : opt.informative;
    Vector w = Vector::Zero(opt.dim);
    for (Index j = 0; j < k; ++j) w[dims[static_cast<std::size_t>(j)]] = standard_normal(rng);

    auto draw = [&](Index m, const std::string& name) {
        Dataset ds;
        ds.name = name;
        ds.features.resize(m, opt.dim);
        ds.labels.resize(m);
        for (Index j = 0; j < opt.dim; ++j) ds.feature_names.push_back("x" + std::to_string(j));
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < opt.dim; ++j) ds.features(i, j) = 2.0 * uniform01(rng) - 1.0;
            ds.labels[i] = ds.features.row(i).dot(w) >= 0.0 ? 1 : -1;
            if (uniform01(rng) < 0.5) {
                for (Index j = 0; j < opt.dim; ++j) ds.features(i, j) += opt.noise_sigma * standard_normal(rng);
            }
        }
        return ds;
    };
    SynthData out;
    out.train = draw(opt.m_train, "synth_train");
    out.test = draw(opt.m_test, "synth_test");
    out.hyperplane = std::move(w);
    return out;
}

Split split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("split: test fraction must lie in (0, 1)");
    }
    std::map<int, std::vector<Index>> by_class;
    for (Index i = 0; i < ds.instances(); ++i) by_class[ds.labels[i]].push_back(i);
    for (const auto& [label, rows] : by_class) {
        if (rows.size() < 2) throw DataError("split: a class has fewer than two instances");
    }

    std::mt19937_64 rng(seed);
    std::vector<Index> train_rows;
    std::vector<Index> test_rows;
    for (auto& [label, rows] : by_class) {
        shuffle(rows, rng);
        const auto n_test =
            static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
        test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return Split{ds.subset(train_rows), ds.subset(test_rows)};
}

}  // namespace breglr
