#pragma once

// Reference solver for the budget-constrained log-loss, minimized directly by
// projected gradient steps. It works on the raw margins and shares no code
// with the Bregman path so the two can check each other.

#include "breglr/bregman.hpp"
#include "breglr/budget.hpp"

namespace breglr {

struct OracleConfig {
    double step_size = 1.0;  // first trial step; later trials double the last accepted one
    int max_iters = 200000;
    double tol = 1e-8;       // on ||lambda - P(lambda - grad)||_inf
    Budget constraint;
};

struct OracleResult {
    Vector lambda;
    double objective = 0.0;
    double projected_gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// sum_i ln(1 + exp(-(lambda^T A)_i)).
double oracle_objective(const ConstraintMatrix& A, const Vector& lambda);
Vector oracle_gradient(const ConstraintMatrix& A, const Vector& lambda);

/// Euclidean projection onto {x : ||x||_1 <= radius}.
Vector l1_project(const Vector& v, double radius);

/// Componentwise clamp to [-u_j, u_j].
Vector box_project(const Vector& v, const Vector& u);

OracleResult oracle_solve(const ConstraintMatrix& A, const OracleConfig& cfg);

}  // namespace breglr
