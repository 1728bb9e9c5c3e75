#include "breglr/report.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace breglr {
namespace {

std::string exact(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void finish(MetricsReport& r) {
    const long total = r.total();
    r.accuracy = total > 0 ? static_cast<double>(r.tp + r.tn) / static_cast<double>(total) : 0.0;
}

void tally(MetricsReport& r, int predicted, int actual) {
    if (actual == 1) {
        predicted == 1 ? ++r.tp : ++r.fn;
    } else {
        predicted == 1 ? ++r.fp : ++r.tn;
    }
}

template <typename T>
T read_value(std::istream& in, const std::string& what) {
    T value{};
    if (!(in >> value)) throw DataError("model file: cannot read " + what);
    return value;
}

void expect_key(std::istream& in, const std::string& key) {
    std::string word;
    if (!(in >> word) || word != key) throw DataError("model file: expected '" + key + "'");
}

}  // namespace

MetricsReport confusion(const std::vector<int>& predicted, const Eigen::VectorXi& actual) {
    if (static_cast<Index>(predicted.size()) != actual.size()) {
        throw std::invalid_argument("confusion: size mismatch");
    }
    MetricsReport r;
    for (std::size_t i = 0; i < predicted.size(); ++i) tally(r, predicted[i], actual[static_cast<Index>(i)]);
    finish(r);
    return r;
}

MetricsReport group_confusion(const std::vector<int>& predicted, const Eigen::VectorXi& actual,
                              const std::vector<std::string>& groups) {
    if (groups.size() != predicted.size() || static_cast<Index>(predicted.size()) != actual.size()) {
        throw std::invalid_argument("group_confusion: size mismatch");
    }
    std::map<std::string, std::pair<int, int>> bags;  // group -> (any predicted positive, truth)
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const int truth = actual[static_cast<Index>(i)];
        auto [it, inserted] = bags.try_emplace(groups[i], -1, truth);
        if (!inserted && it->second.second != truth) {
            throw std::invalid_argument("group_confusion: group '" + groups[i] + "' has mixed labels");
        }
        if (predicted[i] == 1) it->second.first = 1;
    }
    MetricsReport r;
    for (const auto& [name, bag] : bags) tally(r, bag.first, bag.second);
    finish(r);
    return r;
}

std::vector<int> predict_labels(const ParamVector& params, const FeatureScaling& scaling,
                                const Dataset& ds) {
    std::vector<int> out(static_cast<std::size_t>(ds.instances()));
    for (Index i = 0; i < ds.instances(); ++i) {
        out[static_cast<std::size_t>(i)] = predict(params, scaling, ds.features.row(i).transpose()).label;
    }
    return out;
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "iter,loss,train_err,test_err,active_features,max_abs_delta\n";
    for (const auto& r : trace.records) {
        out << r.iter << ',' << exact(r.loss) << ',' << exact(r.train_error) << ','
            << (r.test_error >= 0.0 ? exact(r.test_error) : std::string()) << ','
            << r.active_features << ',' << exact(r.max_abs_delta) << '\n';
    }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsReport>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "method,TP,FN,FP,TN,accuracy,active_features,final_loss\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.tp << ',' << r.fn << ',' << r.fp << ',' << r.tn << ','
            << exact(r.accuracy) << ',' << r.active_features << ',' << exact(r.final_loss) << '\n';
    }
}

void save_model(const std::filesystem::path& path, const Model& model) {
    const FeatureScaling& sc = model.scaling;
    const ParamVector& p = model.params;
    if (p.size() != sc.output_dims()) {
        throw std::invalid_argument("save_model: weights and scaling disagree on dimension");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << kModelHeader << '\n';
    out << "raw_features " << sc.raw_dims() << '\n';
    out << "intercept " << (sc.intercept ? 1 : 0) << '\n';
    const bool uniform = sc.mode == ColumnNormalization::UniformDivisor;
    out << "normalization " << (uniform ? "uniform" : "per_example") << '\n';
    out << "divisor " << exact(sc.divisor) << '\n';
    out << "aggregate " << (p.aggregate_c ? exact(*p.aggregate_c) : std::string("none")) << '\n';
    out << "scaling\n";
    for (Index j = 0; j < sc.raw_dims(); ++j) {
        out << exact(sc.min[j]) << ' ' << exact(sc.max[j]) << ' '
            << (sc.constant[static_cast<std::size_t>(j)] ? 1 : 0) << '\n';
    }
    out << "weights " << p.size() << '\n';
    for (Index j = 0; j < p.size(); ++j) {
        out << exact(p.values[j]) << ' ' << (p.active[static_cast<std::size_t>(j)] ? 1 : 0) << ' '
            << exact(p.budget_u[j]) << '\n';
    }
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    if (header != kModelHeader) throw DataError("model file: unsupported header '" + header + "'");

    Model model;
    FeatureScaling& sc = model.scaling;
    expect_key(in, "raw_features");
    const auto raw = read_value<Index>(in, "raw_features");
    if (raw < 1) throw DataError("model file: bad feature count");
    expect_key(in, "intercept");
    sc.intercept = read_value<int>(in, "intercept") != 0;
    expect_key(in, "normalization");
    const auto mode = read_value<std::string>(in, "normalization");
    if (mode == "uniform") {
        sc.mode = ColumnNormalization::UniformDivisor;
    } else if (mode == "per_example") {
        sc.mode = ColumnNormalization::PerExample;
    } else {
        throw DataError("model file: unknown normalization '" + mode + "'");
    }
    expect_key(in, "divisor");
    sc.divisor = read_value<double>(in, "divisor");
    expect_key(in, "aggregate");
    const auto aggregate = read_value<std::string>(in, "aggregate");
    if (aggregate != "none") model.params.aggregate_c = std::stod(aggregate);
    expect_key(in, "scaling");
    sc.min.resize(raw);
    sc.max.resize(raw);
    sc.constant.resize(static_cast<std::size_t>(raw));
    for (Index j = 0; j < raw; ++j) {
        sc.min[j] = read_value<double>(in, "scaling min");
        sc.max[j] = read_value<double>(in, "scaling max");
        sc.constant[static_cast<std::size_t>(j)] = read_value<int>(in, "scaling flag") != 0;
    }
    expect_key(in, "weights");
    const auto n = read_value<Index>(in, "weight count");
    if (n != sc.output_dims()) throw DataError("model file: weight count does not match scaling");
    ParamVector& p = model.params;
    p.values.resize(n);
    p.budget_u.resize(n);
    p.active.resize(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        p.values[j] = read_value<double>(in, "weight");
        p.active[static_cast<std::size_t>(j)] = read_value<int>(in, "active flag") != 0;
        p.budget_u[j] = read_value<double>(in, "budget");
    }
    return model;
}

}  // namespace breglr
