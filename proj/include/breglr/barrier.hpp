#pragma once

// Per-coordinate constrained minimization of the auxiliary bound
//
//   min  G(delta) + a (s + t) - mu (ln s + ln t + ln r)
//   s.t. delta + s = c_hi,  delta - t = c_lo,  G(delta) + r = 0
//
// with c_hi = u - lambda and c_lo = -u - lambda, solved by a primal-dual
// Newton method on the barrier KKT system while mu is driven to zero.
// Variables are x = [delta, r, s, t]; lam_ineq multiplies G + r = 0 and
// nu multiplies the two box rows.

#include <Eigen/Dense>

#include <array>
#include <string_view>
#include <vector>

namespace breglr {

struct BarrierOptions {
    double mu0 = 1.0;
    double mu_shrink = 0.2;
    double mu_min = 1e-9;
    double tol_kkt = 1e-9;
    int max_newton = 60;  // per barrier stage
    double fraction_to_boundary = 0.95;
    /// Slack penalty weight; non-positive selects 10 max(w+, w-) + 1.
    double penalty_a = 0.0;
    double regularization = 1e-10;

    void validate() const;
};

struct SubproblemSpec {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double lambda = 0.0;  // current weight of this coordinate
    double budget = 0.0;  // u: the new weight must satisfy |lambda + delta| <= u
    BarrierOptions options{};

    double c() const noexcept { return budget - lambda; }
    double c_lower() const noexcept { return -budget - lambda; }
    double penalty() const noexcept;

    /// Throws std::invalid_argument on negative weights, budgets or bad options.
    void validate() const;
};

struct SubproblemState {
    double delta = 0.0;
    double r = 1.0;
    double s = 1.0;
    double t = 1.0;
    double lam_ineq = 0.0;
    std::array<double, 2> nu{0.0, 0.0};
    double mu = 1.0;

    bool interior() const noexcept { return r > 0.0 && s > 0.0 && t > 0.0; }
    double norm_inf() const noexcept;
};

using KktVector = Eigen::Matrix<double, 7, 1>;
using KktMatrix = Eigen::Matrix<double, 7, 7>;

struct KktResidual {
    Eigen::Vector4d dual;  // grad f0 + lam_ineq grad f + E^T nu
    double cent = 0.0;     // G(delta) + r
    Eigen::Vector2d pri;   // E x - b

    KktVector stacked() const;
    double norm_inf() const { return stacked().cwiseAbs().maxCoeff(); }
};

/// Throws DomainError when the state is not strictly interior.
KktResidual kkt_residual(const SubproblemSpec& spec, const SubproblemState& st);

/// The symmetric 7x7 Jacobian of the residual map.
KktMatrix kkt_matrix(const SubproblemSpec& spec, const SubproblemState& st);

struct NewtonStep {
    Eigen::Vector4d dx;  // [d delta, d r, d s, d t]
    double dlam = 0.0;
    Eigen::Vector2d dnu;
    double relative_residual = 0.0;  // ||M d + r|| / ||r||
    bool regularized = false;

    KktVector stacked() const;
};

/// Solves M d = -r by a dense pivoted LU. A singular M is retried with a
/// small diagonal shift and flagged.
NewtonStep newton_step(const SubproblemSpec& spec, const SubproblemState& st);

enum class SubproblemStatus {
    Converged,      // KKT tolerance met at the final barrier parameter
    MaxIterations,  // some stage hit its Newton cap; best iterate returned
    Inert,          // w+ = w- = 0, G is identically zero
    NoDescent,      // no interior point of the box has G < 0
    Negligible      // the achievable decrease is below round-off
};

std::string_view to_string(SubproblemStatus status) noexcept;

struct SubproblemDiagnostics {
    SubproblemStatus status = SubproblemStatus::Converged;
    double delta_unprojected = 0.0;
    double objective = 0.0;  // G at the returned delta
    int newton_iterations = 0;
    int barrier_stages = 0;
    double final_mu = 0.0;
    std::vector<double> residual_history;    // ||r||_inf at the end of each stage
    std::vector<double> centrality_history;  // |r_cent| at the end of each stage
    std::vector<double> mu_history;
    double max_relative_solve_residual = 0.0;
};

struct SubproblemResult {
    double delta = 0.0;
    SubproblemDiagnostics diagnostics;

    bool converged() const noexcept {
        return diagnostics.status != SubproblemStatus::MaxIterations;
    }
};

/// Strictly feasible starting point, or nullopt-like status when none exists.
/// Exposed for tests.
struct BarrierStart {
    bool exists = false;
    SubproblemState state;
};
BarrierStart initial_state(const SubproblemSpec& spec, double mu);

SubproblemResult solve_subproblem(const SubproblemSpec& spec);

}  // namespace breglr
