#include "breglr/aux_bound.hpp"
#include "breglr/barrier.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace breglr;

namespace {

SubproblemSpec make_spec(double wp, double wm, double lambda, double u) {
    SubproblemSpec spec;
    spec.w_plus = wp;
    spec.w_minus = wm;
    spec.lambda = lambda;
    spec.budget = u;
    return spec;
}

double grid_min(const SubproblemSpec& spec, double resolution) {
    const double lo = spec.c_lower();
    const double hi = spec.c();
    double best = coord_loss(hi, spec.w_plus, spec.w_minus);
    const auto steps = static_cast<long>(std::ceil((hi - lo) / resolution));
    for (long k = 0; k < steps; ++k) {
        best = std::min(best, coord_loss(lo + static_cast<double>(k) * resolution, spec.w_plus, spec.w_minus));
    }
    return best;
}

KktVector as_vector(const SubproblemState& st) {
    KktVector x;
    x << st.delta, st.r, st.s, st.t, st.lam_ineq, st.nu[0], st.nu[1];
    return x;
}

SubproblemState from_vector(const KktVector& x, double mu) {
    SubproblemState st;
    st.delta = x[0];
    st.r = x[1];
    st.s = x[2];
    st.t = x[3];
    st.lam_ineq = x[4];
    st.nu = {x[5], x[6]};
    st.mu = mu;
    return st;
}

// A state and spec chosen so that every residual block vanishes.
struct ExactPoint {
    SubproblemSpec spec;
    SubproblemState state;
};

ExactPoint exact_point() {
    const double wm = 0.3;
    const double wp = std::exp(2.0) * wm;  // unconstrained minimizer at 1
    const double delta = 0.5;
    const double s = 0.1;
    const double t = 5.0;
    const double g = coord_loss(delta, wp, wm);
    const double gp = coord_loss_grad(delta, wp, wm);
    const double r = -g;
    const double mu = -gp / (gp / r + 1.0 / s - 1.0 / t);

    ExactPoint out;
    out.spec = make_spec(wp, wm, -(2.0 * delta + s - t) / 2.0, (s + t) / 2.0);
    const double a = out.spec.penalty();
    out.state.delta = delta;
    out.state.r = r;
    out.state.s = s;
    out.state.t = t;
    out.state.mu = mu;
    out.state.lam_ineq = mu / r;
    out.state.nu = {mu / s - a, a - mu / t};
    return out;
}

SubproblemState random_interior_state(std::mt19937_64& rng, const SubproblemSpec& spec) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::uniform_real_distribution<double> wide(-2.0, 2.0);
    SubproblemState st;
    st.delta = spec.c_lower() + unit(rng) * (spec.c() - spec.c_lower());
    st.r = unit(rng);
    st.s = unit(rng);
    st.t = unit(rng);
    st.lam_ineq = unit(rng);
    st.nu = {wide(rng), wide(rng)};
    st.mu = unit(rng) * 0.1;
    return st;
}

}  // namespace

TEST(KktResidual, VanishesAtExactPoint) {
    const ExactPoint p = exact_point();
    ASSERT_GT(p.state.mu, 0.0);
    EXPECT_LE(kkt_residual(p.spec, p.state).norm_inf(), 1e-12);
}

TEST(KktResidual, SymmetricBoxAtOrigin) {
    SubproblemSpec spec = make_spec(0.4, 0.4, 0.0, 0.75);
    SubproblemState st;
    st.delta = 0.0;
    st.s = 0.75;
    st.t = 0.75;
    const KktResidual res = kkt_residual(spec, st);
    EXPECT_EQ(res.pri[0], 0.0);
    EXPECT_EQ(res.pri[1], 0.0);
}

TEST(KktResidual, DeltaPerturbationMovesDualBlock) {
    const ExactPoint p = exact_point();
    const double eps = 1e-6;
    SubproblemState moved = p.state;
    moved.delta += eps;
    const Eigen::Vector4d change = kkt_residual(p.spec, moved).dual - kkt_residual(p.spec, p.state).dual;
    const double h = coord_loss_hess(p.state.delta, p.spec.w_plus, p.spec.w_minus);
    EXPECT_NEAR(change[0], (h + p.state.lam_ineq * h) * eps, 1e-10);
    EXPECT_NEAR(change.tail<3>().norm(), 0.0, 1e-15);
}

TEST(KktResidual, RejectsNonInteriorState) {
    SubproblemState st;
    st.s = 0.0;
    EXPECT_THROW(kkt_residual(make_spec(1.0, 1.0, 0.0, 1.0), st), DomainError);
}

TEST(KktMatrix, MatchesFiniteDifferenceJacobian) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> w(0.01, 1.0);
    std::uniform_real_distribution<double> lam(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const SubproblemSpec spec = make_spec(w(rng), w(rng), lam(rng), 1.5);
        const SubproblemState st = random_interior_state(rng, spec);
        const KktMatrix M = kkt_matrix(spec, st);
        const KktVector x = as_vector(st);
        for (int k = 0; k < 7; ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
            KktVector xp = x;
            KktVector xm = x;
            xp[k] += h;
            xm[k] -= h;
            const KktVector fd = (kkt_residual(spec, from_vector(xp, st.mu)).stacked() -
                                  kkt_residual(spec, from_vector(xm, st.mu)).stacked()) /
                                 (2.0 * h);
            for (int row = 0; row < 7; ++row) {
                EXPECT_NEAR(M(row, k), fd[row], 1e-6 * std::max(1.0, std::abs(M(row, k))))
                    << "row " << row << " col " << k;
            }
        }
        EXPECT_TRUE(M.isApprox(M.transpose(), 0.0));
    }
}

TEST(NewtonStep, ZeroAtExactPoint) {
    const ExactPoint p = exact_point();
    EXPECT_LE(newton_step(p.spec, p.state).stacked().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NewtonStep, SolveResidualIsSmall) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    std::uniform_real_distribution<double> lam(-2.0, 2.0);
    for (int trial = 0; trial < 300; ++trial) {
        const SubproblemSpec spec = make_spec(w(rng), w(rng), lam(rng), 2.5);
        const SubproblemState st = random_interior_state(rng, spec);
        const NewtonStep step = newton_step(spec, st);
        const KktVector r = kkt_residual(spec, st).stacked();
        const double rel = (kkt_matrix(spec, st) * step.stacked() + r).norm() / r.norm();
        EXPECT_LE(rel, 1e-10);
        EXPECT_LE(step.relative_residual, 1e-10);
    }
}

TEST(NewtonStep, DescentForResidualNorm) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> w(0.01, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const SubproblemSpec spec = make_spec(w(rng), w(rng), 0.0, 2.0);
        const SubproblemState st = random_interior_state(rng, spec);
        const KktVector d = newton_step(spec, st).stacked();
        const double alpha = 1e-7;
        const SubproblemState moved = from_vector(as_vector(st) + alpha * d, st.mu);
        EXPECT_LT(kkt_residual(spec, moved).stacked().norm(), kkt_residual(spec, st).stacked().norm());
    }
}

TEST(NewtonStep, NearQuadraticSignMatchesNewton) {
    // Equal weights, small delta, all rows other than the delta row balanced:
    // the delta step points along -G'/G''.
    const SubproblemSpec spec = make_spec(0.5, 0.5, 0.0, 1.0);
    for (double delta : {-0.05, -0.01, 0.01, 0.05}) {
        SubproblemState st;
        st.delta = delta;
        st.mu = 1e-3;
        st.r = 1.0;
        st.s = spec.c() - delta;
        st.t = delta - spec.c_lower();
        st.lam_ineq = st.mu / st.r;
        const double a = spec.penalty();
        st.nu = {st.mu / st.s - a, a - st.mu / st.t};
        // G + r = 0 cannot hold with G >= 0 here; use the matching r.
        st.r = std::max(1e-3, -coord_loss(delta, 0.5, 0.5) + 1e-3);
        const double newton = -coord_loss_grad(delta, 0.5, 0.5) / coord_loss_hess(delta, 0.5, 0.5);
        const NewtonStep step = newton_step(spec, st);
        EXPECT_EQ(std::signbit(step.dx[0]), std::signbit(newton)) << "delta " << delta;
    }
}

TEST(SolveSubproblem, SymmetricWeightsStayAtZero) {
    const SubproblemResult res = solve_subproblem(make_spec(1.0, 1.0, 0.0, 50.0));
    EXPECT_NEAR(res.delta, 0.0, 1e-8);
    EXPECT_TRUE(res.converged());
}

TEST(SolveSubproblem, UnconstrainedMinimizer) {
    const SubproblemResult res = solve_subproblem(make_spec(std::exp(2.0) * 0.2, 0.2, 0.0, 50.0));
    EXPECT_NEAR(res.delta, 1.0, 1e-6);
    EXPECT_EQ(res.diagnostics.status, SubproblemStatus::Converged);
    EXPECT_LE(res.diagnostics.final_mu, 1e-9 / 0.2 + 1e-18);
}

TEST(SolveSubproblem, ActiveBoxLandsOnBoundary) {
    const SubproblemSpec spec = make_spec(std::exp(2.0) * 0.2, 0.2, 0.3, 0.6);
    const SubproblemResult res = solve_subproblem(spec);
    EXPECT_NEAR(res.delta, spec.c(), 1e-6);
    EXPECT_LE(std::abs(spec.lambda + res.delta), spec.budget);
    EXPECT_NEAR(res.diagnostics.objective, grid_min(spec, 1e-6), 1e-5);
}

TEST(SolveSubproblem, DegenerateWeights) {
    const SubproblemResult inert = solve_subproblem(make_spec(0.0, 0.0, 0.2, 1.0));
    EXPECT_EQ(inert.diagnostics.status, SubproblemStatus::Inert);
    EXPECT_EQ(inert.delta, 0.0);

    // Only w+ nonzero: G decreases forever, so the upper end of the box wins.
    const SubproblemSpec one_sided = make_spec(0.7, 0.0, 0.1, 2.0);
    const SubproblemResult res = solve_subproblem(one_sided);
    EXPECT_NEAR(res.delta, one_sided.c(), 1e-7);

    // Current weight outside a shrunken box: delta = 0 is infeasible.
    const SubproblemSpec outside = make_spec(0.5, 0.4, 3.0, 1.0);
    const SubproblemResult pulled = solve_subproblem(outside);
    EXPECT_NEAR(pulled.delta, outside.c(), 1e-12);
    EXPECT_EQ(pulled.diagnostics.status, SubproblemStatus::NoDescent);
}

TEST(SolveSubproblem, RejectsInvalidSpecs) {
    EXPECT_THROW(solve_subproblem(make_spec(-1.0, 1.0, 0.0, 1.0)), std::invalid_argument);
    EXPECT_THROW(solve_subproblem(make_spec(1.0, 1.0, 0.0, -0.5)), std::invalid_argument);
    SubproblemSpec bad = make_spec(1.0, 1.0, 0.0, 1.0);
    bad.options.mu_shrink = 1.0;
    EXPECT_THROW(solve_subproblem(bad), std::invalid_argument);
    bad.options.mu_shrink = 0.2;
    bad.options.tol_kkt = 0.0;
    EXPECT_THROW(solve_subproblem(bad), std::invalid_argument);
}

TEST(SolveSubproblem, MatchesGridSearchAndPathInvariants) {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    std::uniform_real_distribution<double> lam(-1.5, 1.5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        SubproblemSpec spec = make_spec(w(rng), w(rng), lam(rng), u(rng));
        if (std::abs(spec.lambda) > spec.budget) spec.lambda = spec.budget * (spec.lambda > 0 ? 0.9 : -0.9);
        const SubproblemResult res = solve_subproblem(spec);
        EXPECT_LE(std::abs(spec.lambda + res.delta), spec.budget + 1e-15);
        EXPECT_NEAR(res.diagnostics.objective, coord_loss(res.delta, spec.w_plus, spec.w_minus), 1e-15);
        EXPECT_LE(std::abs(res.diagnostics.objective - grid_min(spec, 1e-5)), 1e-5);
        EXPECT_LE(res.diagnostics.objective, 1e-15);

        const auto& d = res.diagnostics;
        ASSERT_EQ(d.centrality_history.size(), d.mu_history.size());
        const double scale = spec.w_plus + spec.w_minus;
        for (std::size_t k = 0; k < d.mu_history.size(); ++k) {
            // Histories are in the solver's unit-weight scaling.
            EXPECT_LE(d.centrality_history[k], 10.0 * d.mu_history[k]) << "stage " << k;
        }
        EXPECT_LE(d.max_relative_solve_residual, 1e-10);

        // No feasible 1-D move improves G noticeably.
        for (double eps : {1e-4, 1e-6}) {
            for (double x : {res.delta - eps, res.delta + eps}) {
                if (x < spec.c_lower() || x > spec.c()) continue;
                EXPECT_GE(coord_loss(x, spec.w_plus, spec.w_minus), d.objective - 1e-9 * (1.0 + scale));
            }
        }
    }
}
