#pragma once

// Outer loop: q^k = L_F(lambda_k^T A, q0), per-coordinate constrained steps
// on the auxiliary bound, lambda_{k+1} = lambda_k + delta_k.

#include "breglr/barrier.hpp"
#include "breglr/bregman.hpp"
#include "breglr/budget.hpp"
#include "breglr/data.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace breglr {

/// Raised when training cannot continue (non-finite loss).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParamVector {
    Vector values;
    std::vector<bool> active;
    Vector budget_u;
    std::optional<double> aggregate_c;

    static ParamVector zeros(Index n, const Budget& budget);

    Index size() const noexcept { return values.size(); }
    Index active_count() const;
    /// Box and (when set) L1 constraints, each with the given slack.
    bool feasible(double slack = 1e-9) const;
};

struct DropRule {
    double threshold = 1e-6;
    int patience = 3;  // consecutive sweeps with |delta_j| < threshold
};

struct TrainConfig {
    Budget budget;
    BarrierOptions barrier{};
    double tol_abs = 1e-8;
    double tol_rel = 1e-6;
    int max_outer = 500;
    DropRule drop{};
    double monotone_slack = 1e-9;
};

struct IterationRecord {
    int iter = 0;
    double loss = 0.0;       // D_B(0 || q^k)
    double train_error = 0.0;
    double test_error = -1.0;  // negative when no test set was given
    Index active_features = 0;
    double max_abs_delta = 0.0;
    double bound_sum = 0.0;  // sum_j G(delta_j) of the step that produced this record
    double aux_value = 0.0;  // A(delta, q) of that step
    int newton_iterations = 0;
    int subproblems_unconverged = 0;
};

struct TrainTrace {
    std::vector<IterationRecord> records;
    bool converged = false;
    std::string stop_reason;
    int monotone_violations = 0;

    const IterationRecord& final() const { return records.back(); }
};

struct TrainResult {
    ParamVector params;
    TrainTrace trace;
};

/// Trains on a normalized constraint matrix. `test`, when given, must use the
/// same feature scaling and only feeds the test-error column of the trace.
/// Throws std::invalid_argument for a non-normalized A or a bad config, and
/// TrainingError if the loss becomes non-finite.
TrainResult train(const ConstraintMatrix& A, const TrainConfig& config,
                  const ConstraintMatrix* test = nullptr);

/// Deactivates coordinate j when its last `patience` steps were all below the
/// threshold in magnitude and |lambda_j| is below it too. `keep` is never
/// deactivated. `delta_history` is oldest first.
std::vector<bool> drop_features(const std::vector<Vector>& delta_history, const Vector& lambda,
                                std::vector<bool> active, const DropRule& rule,
                                std::optional<Index> keep = std::nullopt);

/// Per-coordinate budgets for one sweep in Aggregate mode: the allocation
/// u_j = |x_j(theta)| where x_j minimizes G_j(x - lambda_j) + theta |x| and
/// theta >= 0 is the smallest value with sum_j u_j <= c.
Vector allocate_aggregate_budget(const Vector& w_plus, const Vector& w_minus,
                                 const Vector& lambda, const std::vector<bool>& active,
                                 double radius);

/// Fraction of examples whose predicted label differs from the true one,
/// with f = 0 predicted as +1.
double error_rate(const ConstraintMatrix& A, const Vector& lambda);

struct Prediction {
    int label = 1;
    double probability = 0.5;  // P(y = +1 | x)
};

/// Prediction from an already-scaled feature vector h(x).
Prediction predict_scaled(const Vector& lambda, const Vector& h);

/// Prediction from a raw instance using the stored training scaling.
Prediction predict(const ParamVector& params, const FeatureScaling& scaling, const Vector& raw);

}  // namespace breglr
