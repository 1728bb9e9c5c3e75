#include "breglr/trainer.hpp"

#include "breglr/aux_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace breglr {
namespace {

// x minimizing G(x - lambda) + theta |x| for one coordinate.
double shrunk_weight(double w_plus, double w_minus, double lambda, double theta) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double slope_at_zero = coord_loss_grad(-lambda, w_plus, w_minus);
    if (std::abs(slope_at_zero) <= theta) return 0.0;
    const double root = std::sqrt(theta * theta + 4.0 * w_plus * w_minus);
    if (slope_at_zero < 0.0) {
        // x > 0 with G'(x - lambda) = -theta.
        const double denom = theta + root;
        if (denom <= 0.0) return inf;
        return lambda + std::log(2.0 * w_plus / denom);
    }
    // x < 0 with G'(x - lambda) = theta.
    if (w_minus <= 0.0) return 0.0;
    const double z = (theta + root) / (2.0 * w_minus);
    if (z <= 0.0) return -inf;
    return lambda + std::log(z);
}

double allocation_total(const Vector& w_plus, const Vector& w_minus, const Vector& lambda,
                        const std::vector<bool>& active, double theta, Vector* out) {
    double total = 0.0;
    for (Index j = 0; j < lambda.size(); ++j) {
        double u = 0.0;
        if (active[static_cast<std::size_t>(j)]) {
            u = std::abs(shrunk_weight(w_plus[j], w_minus[j], lambda[j], theta));
        }
        if (out) (*out)[j] = u;
        total += u;
    }
    return total;
}

void restore_feasibility(ParamVector& p, const Budget& budget) {
    if (budget.mode == BudgetMode::PerCoordinate) {
        p.values = p.values.cwiseMax(-budget.per_coord).cwiseMin(budget.per_coord);
        return;
    }
    const double norm = p.values.lpNorm<1>();
    if (norm > budget.aggregate && norm > 0.0) p.values *= budget.aggregate / norm;
}

}  // namespace

ParamVector ParamVector::zeros(Index n, const Budget& budget) {
    ParamVector p;
    p.values = Vector::Zero(n);
    p.active.assign(static_cast<std::size_t>(n), true);
    if (budget.mode == BudgetMode::PerCoordinate) {
        p.budget_u = budget.per_coord;
    } else {
        p.budget_u = Vector::Constant(n, budget.aggregate);
        p.aggregate_c = budget.aggregate;
    }
    return p;
}

Index ParamVector::active_count() const {
    return static_cast<Index>(std::count(active.begin(), active.end(), true));
}

bool ParamVector::feasible(double slack) const {
    if (budget_u.size() != values.size()) return false;
    if (((values.cwiseAbs() - budget_u).array() > slack).any()) return false;
    if (aggregate_c && values.lpNorm<1>() > *aggregate_c + slack) return false;
    return true;
}

Vector allocate_aggregate_budget(const Vector& w_plus, const Vector& w_minus, const Vector& lambda,
                                 const std::vector<bool>& active, double radius) {
    const Index n = lambda.size();
    Vector u = Vector::Zero(n);
    if (allocation_total(w_plus, w_minus, lambda, active, 0.0, &u) <= radius) return u;

    double hi = 0.0;
    for (Index j = 0; j < n; ++j) {
        if (active[static_cast<std::size_t>(j)]) {
            hi = std::max(hi, std::abs(coord_loss_grad(-lambda[j], w_plus[j], w_minus[j])));
        }
    }
    // At theta = hi every coordinate sits at zero. The slopes span many orders
    // of magnitude, so bisect on log(theta).
    double log_hi = std::log(hi);
    double log_lo = log_hi - 1400.0;
    for (int it = 0; it < 200 && log_hi - log_lo > 1e-13; ++it) {
        const double mid = 0.5 * (log_lo + log_hi);
        if (allocation_total(w_plus, w_minus, lambda, active, std::exp(mid), nullptr) <= radius) {
            log_hi = mid;
        } else {
            log_lo = mid;
        }
    }
    const double hi_theta = std::exp(log_hi);
    allocation_total(w_plus, w_minus, lambda, active, hi_theta, &u);
    return u;
}

double error_rate(const ConstraintMatrix& A, const Vector& lambda) {
    const Vector v = A.margins(lambda);
    if (v.size() == 0) return 0.0;
    Index wrong = 0;
    for (Index i = 0; i < v.size(); ++i) {
        // v = y f; f = 0 predicts +1.
        const bool positive = A.labels()[i] == 1;
        if (positive ? v[i] < 0.0 : v[i] <= 0.0) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(v.size());
}

std::vector<bool> drop_features(const std::vector<Vector>& delta_history, const Vector& lambda,
                                std::vector<bool> active, const DropRule& rule,
                                std::optional<Index> keep) {
    if (rule.patience < 1 || static_cast<int>(delta_history.size()) < rule.patience) return active;
    const std::size_t first = delta_history.size() - static_cast<std::size_t>(rule.patience);
    for (Index j = 0; j < lambda.size(); ++j) {
        auto&& flag = active[static_cast<std::size_t>(j)];
        if (!flag || (keep && *keep == j)) continue;
        if (!(std::abs(lambda[j]) < rule.threshold)) continue;
        bool quiet = true;
        for (std::size_t k = first; k < delta_history.size() && quiet; ++k) {
            quiet = std::abs(delta_history[k][j]) < rule.threshold;
        }
        if (quiet) flag = false;
    }
    return active;
}

TrainResult train(const ConstraintMatrix& A, const TrainConfig& config, const ConstraintMatrix* test) {
    const Index n = A.features();
    if (n < 1 || A.examples() < 1) throw std::invalid_argument("train: empty constraint matrix");
    if (!A.is_normalized(1e-12)) {
        throw std::invalid_argument("train: constraint matrix columns must have absolute sum <= 1");
    }
    if (test && test->features() != n) {
        throw std::invalid_argument("train: test matrix has a different feature count");
    }
    if (config.max_outer < 0) throw std::invalid_argument("train: max_outer must be nonnegative");
    config.budget.validate(n);
    config.barrier.validate();

    TrainResult result;
    ParamVector& p = result.params;
    TrainTrace& trace = result.trace;
    p = ParamVector::zeros(n, config.budget);

    Vector margins = A.margins(p.values);
    DistPoint q = model_distribution(A, p.values);
    double loss = log_loss_from_margins(margins);

    auto record = [&](int iter) {
        IterationRecord rec;
        rec.iter = iter;
        rec.loss = loss;
        rec.train_error = error_rate(A, p.values);
        if (test) rec.test_error = error_rate(*test, p.values);
        rec.active_features = p.active_count();
        trace.records.push_back(rec);
        return &trace.records.back();
    };
    record(0);

    std::vector<Vector> history;
    trace.stop_reason = "max_outer";
    for (int k = 1; k <= config.max_outer; ++k) {
        if (p.active_count() == 0) {
            trace.converged = true;
            trace.stop_reason = "no_active_features";
            break;
        }
        const CoordWeights w = coord_weights(q, A);
        const Vector u = config.budget.mode == BudgetMode::Aggregate
                             ? allocate_aggregate_budget(w.w_plus, w.w_minus, p.values, p.active,
                                                         config.budget.aggregate)
                             : config.budget.per_coord;

        Vector delta = Vector::Zero(n);
        double bound_sum = 0.0;
        int newton = 0;
        int unconverged = 0;
        for (Index j = 0; j < n; ++j) {
            if (!p.active[static_cast<std::size_t>(j)]) continue;
            SubproblemSpec spec;
            spec.w_plus = w.w_plus[j];
            spec.w_minus = w.w_minus[j];
            spec.lambda = p.values[j];
            spec.budget = u[j];
            spec.options = config.barrier;
            const SubproblemResult sub = solve_subproblem(spec);
            delta[j] = sub.delta;
            bound_sum += sub.diagnostics.objective;
            newton += sub.diagnostics.newton_iterations;
            if (!sub.converged()) ++unconverged;
        }
        const double aux = auxiliary_value(delta, q, A);

        p.values += delta;
        restore_feasibility(p, config.budget);
        margins = A.margins(p.values);
        q = model_distribution(A, p.values);
        const double next_loss = log_loss_from_margins(margins);
        if (!std::isfinite(next_loss)) {
            std::ostringstream msg;
            msg << "train: non-finite loss at iteration " << k << " (previous loss " << loss
                << ", max |lambda| " << p.values.cwiseAbs().maxCoeff() << ", bound sum "
                << bound_sum << ", max |delta| " << delta.cwiseAbs().maxCoeff() << ")";
            throw TrainingError(msg.str());
        }
        if (next_loss > loss + config.monotone_slack) ++trace.monotone_violations;
        const double decrease = loss - next_loss;
        loss = next_loss;

        IterationRecord* rec = record(k);
        rec->max_abs_delta = delta.cwiseAbs().maxCoeff();
        rec->bound_sum = bound_sum;
        rec->aux_value = aux;
        rec->newton_iterations = newton;
        rec->subproblems_unconverged = unconverged;

        history.push_back(std::move(delta));
        if (history.size() > static_cast<std::size_t>(std::max(config.drop.patience, 1))) {
            history.erase(history.begin());
        }
        p.active = drop_features(history, p.values, p.active, config.drop, A.intercept_row());
        rec->active_features = p.active_count();

        if (decrease < config.tol_abs || decrease < config.tol_rel * std::abs(loss)) {
            trace.converged = true;
            trace.stop_reason = "tolerance";
            break;
        }
    }
    return result;
}

Prediction predict_scaled(const Vector& lambda, const Vector& h) {
    if (lambda.size() != h.size()) throw std::invalid_argument("predict: dimension mismatch");
    const double f = lambda.dot(h);
    Prediction out;
    out.label = f >= 0.0 ? 1 : -1;
    out.probability = sigmoid(-f);
    return out;
}

Prediction predict(const ParamVector& params, const FeatureScaling& scaling, const Vector& raw) {
    if (params.size() != scaling.output_dims()) {
        throw std::invalid_argument("predict: model and scaling disagree on dimension");
    }
    return predict_scaled(params.values, scaling.apply(raw));
}

}  // namespace breglr
