#include "breglr/cli.hpp"

#include "breglr/data.hpp"
#include "breglr/oracle.hpp"
#include "breglr/report.hpp"
#include "breglr/trainer.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <stdexcept>

namespace breglr::cli {
namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
    static const Level level = [] {
        const char* env = std::getenv("BREGLR_LOG_LEVEL");
        if (!env) return Level::Warn;
        static const std::map<std::string, Level> names = {
            {"error", Level::Error}, {"warn", Level::Warn}, {"info", Level::Info}, {"debug", Level::Debug}};
        const auto it = names.find(env);
        return it == names.end() ? Level::Warn : it->second;
    }();
    return level;
}

void log(Level level, const std::string& msg) {
    static const char* tags[] = {"error", "warn", "info", "debug"};
    if (level <= log_level()) std::cerr << "breglr [" << tags[static_cast<int>(level)] << "] " << msg << '\n';
}

double resolved_budget(const RunConfig& cfg, Index n) {
    if (cfg.budget) return *cfg.budget;
    return cfg.budget_mode == BudgetMode::Aggregate ? kDefaultBudgetPerFeature * static_cast<double>(n)
                                                    : kDefaultBudgetPerFeature;
}

TrainConfig train_config(const RunConfig& cfg, Index n, double budget, BudgetMode mode) {
    TrainConfig tc;
    tc.budget = mode == BudgetMode::Aggregate ? Budget::from_aggregate(n, budget, BudgetMode::Aggregate)
                                              : Budget::uniform(n, budget);
    tc.barrier.mu0 = cfg.mu0;
    tc.barrier.mu_shrink = cfg.mu_shrink;
    tc.tol_rel = cfg.tol;
    tc.max_outer = cfg.max_iter;
    tc.drop.threshold = cfg.drop_threshold;
    return tc;
}

Dataset load(const RunConfig& cfg) {
    CsvOptions opt;
    opt.label_column = cfg.label_col;
    opt.positive_label = cfg.positive_label;
    opt.group_column = cfg.bag_col;
    Dataset ds = load_csv(cfg.data, opt);
    if (ds.rejected_rows > 0) log(Level::Warn, "rejected " + std::to_string(ds.rejected_rows) + " malformed rows");
    log(Level::Info, "loaded " + std::to_string(ds.instances()) + " instances, " +
                         std::to_string(ds.dims()) + " features from " + cfg.data.string());
    return ds;
}

Split train_test(const RunConfig& cfg, const Dataset& ds) {
    if (cfg.test_fraction <= 0.0) return Split{ds, Dataset{}};
    return split(ds, cfg.test_fraction, cfg.seed);
}

MetricsReport score(const std::string& method, const Vector& lambda, const FeatureScaling& scaling,
                    const Dataset& eval_set, const Dataset& train_set, Index active) {
    ParamVector p;
    p.values = lambda;
    MetricsReport r = confusion(predict_labels(p, scaling, eval_set), eval_set.labels);
    r.method = method;
    r.active_features = active;
    r.final_loss = oracle_objective(constraint_matrix(train_set, scaling), lambda);
    return r;
}

void summarize(const MetricsReport& r) {
    std::cout << r.method << ": TP " << r.tp << " FN " << r.fn << " FP " << r.fp << " TN " << r.tn
              << " accuracy " << r.accuracy << " active " << r.active_features << " loss " << r.final_loss
              << '\n';
}

int finish_status(const TrainTrace& trace) {
    if (trace.converged) return kOk;
    log(Level::Warn, "outer loop stopped at the iteration cap (" + trace.stop_reason + ")");
    return kNotConverged;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const DataError& e) {
        log(Level::Error, e.what());
        return kDataError;
    } catch (const TrainingError& e) {
        log(Level::Error, e.what());
        return kNotConverged;
    } catch (const std::invalid_argument& e) {
        log(Level::Error, e.what());
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        log(Level::Error, e.what());
        return kDataError;
    }
}

}  // namespace

void RunConfig::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    const bool needs_data = command != Command::Synth;
    require(!needs_data || !data.empty(), "--data is required");
    require(command != Command::Eval || !model.empty(), "eval needs --model");
    require(!budget || (std::isfinite(*budget) && *budget >= 0.0), "--budget must be nonnegative");
    require(std::isfinite(large_budget) && large_budget > 0.0, "--large-budget must be positive");
    require(mu0 > 0.0, "--mu0 must be positive");
    require(mu_shrink > 0.0 && mu_shrink < 1.0, "--mu-shrink must lie in (0, 1)");
    require(tol > 0.0, "--tol must be positive");
    require(max_iter >= 0, "--max-iter must be nonnegative");
    require(drop_threshold > 0.0, "--drop-threshold must be positive");
    require(test_fraction >= 0.0 && test_fraction < 1.0, "--test-fraction must lie in [0, 1)");
    require(synth_dim >= 1 && synth_train >= 2 && synth_test >= 0, "synthetic sizes out of range");
    require(synth_noise >= 0.0, "--noise must be nonnegative");
    require(synth_informative >= 0 && synth_informative <= synth_dim, "--informative exceeds --dim");
}

int cmd_train(const RunConfig& cfg) {
    return guarded([&] {
        cfg.validate();
        const Dataset ds = load(cfg);
        const Split parts = train_test(cfg, ds);
        const FeatureScaling scaling = fit_scaling(parts.train);
        const ConstraintMatrix A = constraint_matrix(parts.train, scaling);
        const bool has_test = parts.test.instances() > 0;
        const std::optional<ConstraintMatrix> T =
            has_test ? std::optional(constraint_matrix(parts.test, scaling)) : std::nullopt;

        const Index n = A.features();
        const TrainResult res =
            train(A, train_config(cfg, n, resolved_budget(cfg, n), cfg.budget_mode), T ? &*T : nullptr);

        std::filesystem::create_directories(cfg.out);
        save_model(cfg.out / "model.txt", Model{res.params, scaling});
        write_trace_csv(cfg.out / "trace.csv", res.trace);
        const Dataset& eval_set = has_test ? parts.test : parts.train;
        const MetricsReport r = score("L1LRB", res.params.values, scaling, eval_set, parts.train,
                                      res.params.active_count());
        write_metrics_csv(cfg.out / "metrics.csv", {r});
        summarize(r);
        log(Level::Info, "stopped after " + std::to_string(res.trace.final().iter) + " iterations (" +
                             res.trace.stop_reason + ")");
        return finish_status(res.trace);
    });
}

int cmd_eval(const RunConfig& cfg) {
    return guarded([&] {
        cfg.validate();
        const Model model = load_model(cfg.model);
        const Dataset ds = load(cfg);
        if (ds.dims() != model.scaling.raw_dims()) {
            throw DataError("data has " + std::to_string(ds.dims()) + " features, model expects " +
                            std::to_string(model.scaling.raw_dims()));
        }
        const std::vector<int> pred = predict_labels(model.params, model.scaling, ds);
        std::vector<MetricsReport> rows;
        MetricsReport r = confusion(pred, ds.labels);
        r.method = "L1LRB";
        r.active_features = model.params.active_count();
        r.final_loss = oracle_objective(constraint_matrix(ds, model.scaling), model.params.values);
        rows.push_back(r);
        if (!ds.groups.empty()) {
            MetricsReport g = group_confusion(pred, ds.labels, ds.groups);
            g.method = "L1LRB-bag";
            g.active_features = r.active_features;
            g.final_loss = r.final_loss;
            rows.push_back(g);
        }
        std::filesystem::create_directories(cfg.out);
        write_metrics_csv(cfg.out / "eval_metrics.csv", rows);
        for (const auto& row : rows) summarize(row);
        return kOk;
    });
}

int cmd_bench(const RunConfig& cfg) {
    return guarded([&] {
        cfg.validate();
        const Dataset ds = load(cfg);
        const Split parts = train_test(cfg, ds);
        const bool has_test = parts.test.instances() > 0;
        const Dataset& eval_set = has_test ? parts.test : parts.train;
        const FeatureScaling scaling = fit_scaling(parts.train);
        const ConstraintMatrix A = constraint_matrix(parts.train, scaling);
        const std::optional<ConstraintMatrix> T =
            has_test ? std::optional(constraint_matrix(parts.test, scaling)) : std::nullopt;
        const Index n = A.features();

        const TrainConfig reg = train_config(cfg, n, resolved_budget(cfg, n), cfg.budget_mode);
        const TrainResult l1 = train(A, reg, T ? &*T : nullptr);
        log(Level::Info, "L1LRB: " + std::to_string(l1.trace.final().iter) + " iterations");

        OracleConfig oc;
        oc.constraint = reg.budget;
        const OracleResult orc = oracle_solve(A, oc);
        if (!orc.converged) log(Level::Warn, "oracle stopped before reaching its tolerance");
        const Index oracle_active = (orc.lambda.array().abs() > cfg.drop_threshold).count();

        const TrainResult wide =
            train(A, train_config(cfg, n, cfg.large_budget, BudgetMode::PerCoordinate), T ? &*T : nullptr);

        std::vector<MetricsReport> rows = {
            score("L1LRB", l1.params.values, scaling, eval_set, parts.train, l1.params.active_count()),
            score("oracle", orc.lambda, scaling, eval_set, parts.train, oracle_active),
            score("unregularized", wide.params.values, scaling, eval_set, parts.train,
                  wide.params.active_count()),
        };
        if (!eval_set.groups.empty()) {
            const Vector* weights[] = {&l1.params.values, &orc.lambda, &wide.params.values};
            for (std::size_t k = 0; k < 3; ++k) {
                ParamVector p;
                p.values = *weights[k];
                MetricsReport g =
                    group_confusion(predict_labels(p, scaling, eval_set), eval_set.labels, eval_set.groups);
                g.method = rows[k].method + "-bag";
                g.active_features = rows[k].active_features;
                g.final_loss = rows[k].final_loss;
                rows.push_back(g);
            }
        }
        std::filesystem::create_directories(cfg.out);
        write_metrics_csv(cfg.out / "metrics.csv", rows);
        write_trace_csv(cfg.out / "curves_l1lrb.csv", l1.trace);
        write_trace_csv(cfg.out / "curves_unregularized.csv", wide.trace);
        for (const auto& r : rows) summarize(r);
        return finish_status(l1.trace);
    });
}

int cmd_synth(const RunConfig& cfg) {
    return guarded([&] {
        cfg.validate();
        SynthOptions so;
        so.dim = cfg.synth_dim;
        so.m_train = cfg.synth_train;
        so.m_test = cfg.synth_test;
        so.noise_sigma = cfg.synth_noise;
        so.seed = cfg.seed;
        so.informative = cfg.synth_informative;
        const SynthData data = synth_hyperplane(so);

        std::filesystem::create_directories(cfg.out);
        write_csv(data.train, cfg.out / "synth_train.csv");
        if (data.test.instances() > 0) write_csv(data.test, cfg.out / "synth_test.csv");

        const FeatureScaling scaling = fit_scaling(data.train);
        const ConstraintMatrix A = constraint_matrix(data.train, scaling);
        const bool has_test = data.test.instances() > 0;
        const std::optional<ConstraintMatrix> T =
            has_test ? std::optional(constraint_matrix(data.test, scaling)) : std::nullopt;
        const Index n = A.features();
        const TrainResult l1 =
            train(A, train_config(cfg, n, resolved_budget(cfg, n), cfg.budget_mode), T ? &*T : nullptr);
        const TrainResult wide =
            train(A, train_config(cfg, n, cfg.large_budget, BudgetMode::PerCoordinate), T ? &*T : nullptr);

        save_model(cfg.out / "model.txt", Model{l1.params, scaling});
        write_trace_csv(cfg.out / "trace.csv", l1.trace);
        write_trace_csv(cfg.out / "trace_unregularized.csv", wide.trace);
        const Dataset& eval_set = has_test ? data.test : data.train;
        const std::vector<MetricsReport> rows = {
            score("L1LRB", l1.params.values, scaling, eval_set, data.train, l1.params.active_count()),
            score("unregularized", wide.params.values, scaling, eval_set, data.train,
                  wide.params.active_count()),
        };
        write_metrics_csv(cfg.out / "metrics.csv", rows);
        for (const auto& r : rows) summarize(r);
        return finish_status(l1.trace);
    });
}

int run(int argc, char** argv) {
    CLI::App app{"L1-constrained logistic regression by Bregman auxiliary-function descent"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub, bool with_data) {
        if (with_data) {
            sub->add_option("--data", cfg.data, "CSV file with one instance per row")->required();
            sub->add_option("--label-col", cfg.label_col, "zero-based label column")->capture_default_str();
            sub->add_option("--positive-label", cfg.positive_label, "token of the positive class")
                ->capture_default_str();
            sub->add_option("--bag-col", cfg.bag_col, "zero-based column of a group id (excluded from features)");
        }
        sub->add_option("--budget", cfg.budget,
                        "L1 radius (aggregate) or box half-width (per-coord); default 10 per feature");
        sub->add_option("--budget-mode", cfg.budget_mode, "aggregate or per-coord")
            ->transform(CLI::CheckedTransformer(
                std::map<std::string, BudgetMode>{{"aggregate", BudgetMode::Aggregate},
                                                  {"per-coord", BudgetMode::PerCoordinate}}));
        sub->add_option("--large-budget", cfg.large_budget, "box half-width of the unregularized run")
            ->capture_default_str();
        sub->add_option("--mu0", cfg.mu0, "initial barrier parameter")->capture_default_str();
        sub->add_option("--mu-shrink", cfg.mu_shrink, "barrier shrink factor")->capture_default_str();
        sub->add_option("--tol", cfg.tol, "relative loss decrease that ends training")->capture_default_str();
        sub->add_option("--max-iter", cfg.max_iter, "outer iteration cap")->capture_default_str();
        sub->add_option("--drop-threshold", cfg.drop_threshold, "feature drop threshold")->capture_default_str();
        sub->add_option("--test-fraction", cfg.test_fraction, "stratified test share, 0 for none")
            ->capture_default_str();
        sub->add_option("--seed", cfg.seed, "split and generator seed")->capture_default_str();
        sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    };

    CLI::App* train_cmd = app.add_subcommand("train", "fit a model and write model.txt, trace.csv, metrics.csv");
    add_common(train_cmd, true);

    CLI::App* eval_cmd = app.add_subcommand("eval", "score a saved model on a dataset");
    add_common(eval_cmd, true);
    eval_cmd->add_option("--model", cfg.model, "model file written by train")->required();

    CLI::App* bench_cmd = app.add_subcommand("bench", "compare L1LRB, the oracle and an unregularized fit");
    add_common(bench_cmd, true);

    CLI::App* synth_cmd = app.add_subcommand("synth", "noisy-hyperplane experiment");
    add_common(synth_cmd, false);
    synth_cmd->add_option("--dim", cfg.synth_dim, "dimension")->capture_default_str();
    synth_cmd->add_option("--m-train", cfg.synth_train, "training instances")->capture_default_str();
    synth_cmd->add_option("--m-test", cfg.synth_test, "test instances")->capture_default_str();
    synth_cmd->add_option("--noise", cfg.synth_noise, "noise standard deviation")->capture_default_str();
    synth_cmd->add_option("--informative", cfg.synth_informative, "nonzero hyperplane dimensions, 0 for all")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*train_cmd) return cmd_train(cfg);
    if (*eval_cmd) {
        cfg.command = Command::Eval;
        return cmd_eval(cfg);
    }
    if (*bench_cmd) {
        cfg.command = Command::Bench;
        return cmd_bench(cfg);
    }
    cfg.command = Command::Synth;
    return cmd_synth(cfg);
}

}  // namespace breglr::cli
