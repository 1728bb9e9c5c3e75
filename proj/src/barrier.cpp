#include "breglr/barrier.hpp"

#include "breglr/aux_bound.hpp"
#include "breglr/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace breglr {
namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-14;

// Decrease of G below this multiple of (w+ + w-) is treated as round-off.
constexpr double kNegligibleDecrease = 1e-14;

SubproblemState advance(const SubproblemState& st, const NewtonStep& step, double alpha) {
    SubproblemState out = st;
    out.delta += alpha * step.dx[0];
    out.r += alpha * step.dx[1];
    out.s += alpha * step.dx[2];
    out.t += alpha * step.dx[3];
    out.lam_ineq += alpha * step.dlam;
    out.nu[0] += alpha * step.dnu[0];
    out.nu[1] += alpha * step.dnu[1];
    return out;
}

// Largest step in (0, 1] keeping r, s, t at least (1 - tau) of their distance
// to the boundary.
double fraction_to_boundary(const SubproblemState& st, const NewtonStep& step, double tau) {
    double alpha = 1.0;
    const double x[3] = {st.r, st.s, st.t};
    for (int k = 0; k < 3; ++k) {
        const double dk = step.dx[k + 1];
        if (dk < 0.0) alpha = std::min(alpha, tau * (-x[k] / dk));
    }
    return alpha;
}

SubproblemResult closed_form(const SubproblemSpec& spec, double delta, SubproblemStatus status) {
    SubproblemResult res;
    res.delta = delta;
    res.diagnostics.status = status;
    res.diagnostics.delta_unprojected = delta;
    res.diagnostics.objective = coord_loss(delta, spec.w_plus, spec.w_minus);
    return res;
}

}  // namespace

void BarrierOptions::validate() const {
    if (!(mu0 > 0.0)) throw std::invalid_argument("barrier: mu0 must be positive");
    if (!(mu_shrink > 0.0 && mu_shrink < 1.0)) {
        throw std::invalid_argument("barrier: mu_shrink must lie in (0,1)");
    }
    if (!(mu_min > 0.0)) throw std::invalid_argument("barrier: mu_min must be positive");
    if (!(tol_kkt > 0.0)) throw std::invalid_argument("barrier: tol_kkt must be positive");
    if (max_newton < 1) throw std::invalid_argument("barrier: max_newton must be positive");
    if (!(fraction_to_boundary > 0.0 && fraction_to_boundary < 1.0)) {
        throw std::invalid_argument("barrier: fraction_to_boundary must lie in (0,1)");
    }
}

double SubproblemSpec::penalty() const noexcept {
    if (options.penalty_a > 0.0) return options.penalty_a;
    return 10.0 * std::max(w_plus, w_minus) + 1.0;
}

void SubproblemSpec::validate() const {
    if (!(w_plus >= 0.0) || !(w_minus >= 0.0) || !std::isfinite(w_plus) ||
        !std::isfinite(w_minus)) {
        throw std::invalid_argument("subproblem: weights must be finite and nonnegative");
    }
    if (!(budget >= 0.0) || !std::isfinite(budget)) {
        throw std::invalid_argument("subproblem: budget must be finite and nonnegative");
    }
    if (!std::isfinite(lambda)) throw std::invalid_argument("subproblem: lambda must be finite");
    options.validate();
}

double SubproblemState::norm_inf() const noexcept {
    return std::max({std::abs(delta), std::abs(r), std::abs(s), std::abs(t),
                     std::abs(lam_ineq), std::abs(nu[0]), std::abs(nu[1])});
}

KktVector KktResidual::stacked() const {
    KktVector v;
    v << dual, cent, pri;
    return v;
}

KktVector NewtonStep::stacked() const {
    KktVector v;
    v << dx, dlam, dnu;
    return v;
}

KktResidual kkt_residual(const SubproblemSpec& spec, const SubproblemState& st) {
    if (!st.interior()) throw DomainError("kkt_residual: state must satisfy r, s, t > 0");
    const double g = coord_loss(st.delta, spec.w_plus, spec.w_minus);
    const double dg = coord_loss_grad(st.delta, spec.w_plus, spec.w_minus);
    const double a = spec.penalty();
    const double mu = st.mu;

    KktResidual res;
    res.dual << dg * (1.0 + st.lam_ineq) + st.nu[0] + st.nu[1],
                -mu / st.r + st.lam_ineq,
                a - mu / st.s + st.nu[0],
                a - mu / st.t - st.nu[1];
    res.cent = g + st.r;
    res.pri << st.delta + st.s - spec.c(),
               st.delta - st.t - spec.c_lower();
    return res;
}

KktMatrix kkt_matrix(const SubproblemSpec& spec, const SubproblemState& st) {
    if (!st.interior()) throw DomainError("kkt_matrix: state must satisfy r, s, t > 0");
    const double dg = coord_loss_grad(st.delta, spec.w_plus, spec.w_minus);
    const double d2g = coord_loss_hess(st.delta, spec.w_plus, spec.w_minus);
    const double mu = st.mu;

    KktMatrix m = KktMatrix::Zero();
    // Hessian of the Lagrangian in x.
    m(0, 0) = d2g * (1.0 + st.lam_ineq);
    m(1, 1) = mu / (st.r * st.r);
    m(2, 2) = mu / (st.s * st.s);
    m(3, 3) = mu / (st.t * st.t);
    // J^T column and row for G(delta) + r = 0.
    m(0, 4) = m(4, 0) = dg;
    m(1, 4) = m(4, 1) = 1.0;
    // E^T columns for delta + s = c and delta - t = c_lo.
    m(0, 5) = m(5, 0) = 1.0;
    m(2, 5) = m(5, 2) = 1.0;
    m(0, 6) = m(6, 0) = 1.0;
    m(3, 6) = m(6, 3) = -1.0;
    return m;
}

NewtonStep newton_step(const SubproblemSpec& spec, const SubproblemState& st) {
    const KktMatrix m = kkt_matrix(spec, st);
    const KktVector rhs = -kkt_residual(spec, st).stacked();

    NewtonStep step;
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        step.dx.setZero();
        step.dnu.setZero();
        return step;
    }

    // Symmetric Ruiz equilibration; the barrier terms make the raw matrix
    // badly scaled as r, s or t approach zero.
    KktVector scale = KktVector::Ones();
    for (int pass = 0; pass < 4; ++pass) {
        const KktMatrix scaled = scale.asDiagonal() * m * scale.asDiagonal();
        for (int k = 0; k < 7; ++k) {
            const double row_max = scaled.row(k).cwiseAbs().maxCoeff();
            if (row_max > 0.0) scale[k] /= std::sqrt(row_max);
        }
    }
    KktMatrix factored = scale.asDiagonal() * m * scale.asDiagonal();
    Eigen::FullPivLU<KktMatrix> lu(factored);
    if (!lu.isInvertible()) {
        const double reg = spec.options.regularization;
        for (int k = 0; k < 4; ++k) factored(k, k) += reg;
        for (int k = 4; k < 7; ++k) factored(k, k) -= reg;
        lu.compute(factored);
        step.regularized = true;
        if (!lu.isInvertible()) throw DomainError("newton_step: KKT matrix is singular");
    }
    const KktVector scaled_rhs = scale.asDiagonal() * rhs;
    KktVector d = scale.asDiagonal() * lu.solve(scaled_rhs);
    double residual = (m * d - rhs).norm() / rhs_norm;
    // Iterative refinement against the unscaled system; keep the best iterate.
    for (int round = 0; round < 3 && residual > 1e-14; ++round) {
        const KktVector fix = scale.asDiagonal() * lu.solve(scale.asDiagonal() * (rhs - m * d));
        const KktVector trial = d + fix;
        const double trial_residual = (m * trial - rhs).norm() / rhs_norm;
        if (!(trial_residual < residual)) break;
        d = trial;
        residual = trial_residual;
    }

    step.dx = d.head<4>();
    step.dlam = d[4];
    step.dnu = d.tail<2>();
    step.relative_residual = residual;
    return step;
}

std::string_view to_string(SubproblemStatus status) noexcept {
    switch (status) {
        case SubproblemStatus::Converged: return "converged";
        case SubproblemStatus::MaxIterations: return "max_iterations";
        case SubproblemStatus::Inert: return "inert";
        case SubproblemStatus::NoDescent: return "no_descent";
        case SubproblemStatus::Negligible: return "negligible";
    }
    return "unknown";
}

BarrierStart initial_state(const SubproblemSpec& spec, double mu) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double wp = spec.w_plus;
    const double wm = spec.w_minus;

    // Open interval on which G < 0.
    double lo_g = 0.0;
    double hi_g = 0.0;
    if (wp > 0.0 && wm > 0.0) {
        const double star = coord_loss_argmin(wp, wm);
        lo_g = std::min(0.0, 2.0 * star);
        hi_g = std::max(0.0, 2.0 * star);
    } else if (wp > 0.0) {
        hi_g = inf;
    } else if (wm > 0.0) {
        lo_g = -inf;
    }

    const double lo = std::max(lo_g, spec.c_lower());
    const double hi = std::min(hi_g, spec.c());
    BarrierStart start;
    if (!(hi > lo)) return start;

    SubproblemState& st = start.state;
    st.mu = mu;
    st.delta = 0.5 * (lo + hi);
    st.r = -coord_loss(st.delta, wp, wm);
    st.s = spec.c() - st.delta;
    st.t = st.delta - spec.c_lower();
    if (!st.interior()) return start;

    // Multipliers that zero the r, s and t rows of the dual residual.
    const double a = spec.penalty();
    st.lam_ineq = mu / st.r;
    st.nu[0] = mu / st.s - a;
    st.nu[1] = a - mu / st.t;
    start.exists = true;
    return start;
}

SubproblemResult solve_subproblem(const SubproblemSpec& spec) {
    spec.validate();
    const double wp = spec.w_plus;
    const double wm = spec.w_minus;
    const double lo = spec.c_lower();
    const double hi = spec.c();
    const BarrierOptions& opt = spec.options;

    if (wp == 0.0 && wm == 0.0) {
        return closed_form(spec, std::clamp(0.0, lo, hi), SubproblemStatus::Inert);
    }

    const double box_min = std::clamp(coord_loss_argmin(wp, wm), lo, hi);
    const BarrierStart start = initial_state(spec, opt.mu0);
    if (!start.exists) return closed_form(spec, box_min, SubproblemStatus::NoDescent);
    if (-coord_loss(box_min, wp, wm) <= kNegligibleDecrease * (wp + wm)) {
        return closed_form(spec, box_min, SubproblemStatus::Negligible);
    }

    // The minimizer is invariant to a common scaling of the weights; solving
    // with w+ + w- = 1 makes mu and the KKT tolerance relative to G's scale.
    SubproblemSpec unit = spec;
    const double weight_sum = wp + wm;
    unit.w_plus = wp / weight_sum;
    unit.w_minus = wm / weight_sum;
    if (opt.penalty_a > 0.0) unit.options.penalty_a = opt.penalty_a / weight_sum;

    SubproblemResult result;
    SubproblemDiagnostics& diag = result.diagnostics;
    SubproblemState st = initial_state(unit, opt.mu0).state;

    double best_delta = st.delta;
    double best_g = coord_loss(st.delta, wp, wm);
    bool all_converged = true;

    for (double mu = opt.mu0; mu >= opt.mu_min; mu *= opt.mu_shrink) {
        st.mu = mu;
        ++diag.barrier_stages;
        bool stage_converged = false;
        KktResidual res = kkt_residual(unit, st);

        for (int it = 0; it < opt.max_newton; ++it) {
            if (res.norm_inf() <= opt.tol_kkt * (1.0 + st.norm_inf())) {
                stage_converged = true;
                break;
            }
            const NewtonStep step = newton_step(unit, st);
            diag.max_relative_solve_residual =
                std::max(diag.max_relative_solve_residual, step.relative_residual);

            const double merit0 = res.stacked().norm();
            double alpha = fraction_to_boundary(st, step, opt.fraction_to_boundary);
            bool accepted = false;
            while (alpha >= kMinStep) {
                const SubproblemState trial = advance(st, step, alpha);
                if (trial.interior()) {
                    const KktResidual trial_res = kkt_residual(unit, trial);
                    if (trial_res.stacked().norm() <= (1.0 - kArmijo * alpha) * merit0) {
                        st = trial;
                        res = trial_res;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
            ++diag.newton_iterations;

            const double g = coord_loss(st.delta, wp, wm);
            if (st.delta >= lo && st.delta <= hi && g < best_g) {
                best_g = g;
                best_delta = st.delta;
            }
        }
        if (!stage_converged) {
            stage_converged = res.norm_inf() <= opt.tol_kkt * (1.0 + st.norm_inf());
        }
        all_converged = all_converged && stage_converged;
        diag.residual_history.push_back(res.norm_inf());
        diag.centrality_history.push_back(std::abs(res.cent));
        diag.mu_history.push_back(mu);
        diag.final_mu = mu;
    }

    diag.delta_unprojected = st.delta;
    double delta = std::clamp(st.delta, lo, hi);
    if (coord_loss(delta, wp, wm) > best_g) delta = best_delta;

    result.delta = delta;
    diag.objective = coord_loss(delta, wp, wm);
    diag.status = all_converged ? SubproblemStatus::Converged : SubproblemStatus::MaxIterations;
    return result;
}

}  // namespace breglr
