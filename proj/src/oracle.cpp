#include "breglr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace breglr {
namespace {

constexpr double kMaxStep = 1e12;

// log(1 + exp(-z)), written out here rather than shared with the Bregman code.
double logistic_loss(double z) {
    return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

// d/dz log(1 + exp(-z)) = -1 / (1 + exp(z)).
double logistic_slope(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return -e / (1.0 + e);
    }
    return -1.0 / (1.0 + std::exp(z));
}

Vector project(const Budget& b, const Vector& v) {
    return b.mode == BudgetMode::Aggregate ? l1_project(v, b.aggregate) : box_project(v, b.per_coord);
}

}  // namespace

double oracle_objective(const ConstraintMatrix& A, const Vector& lambda) {
    const Vector z = A.entries().transpose() * lambda;
    double sum = 0.0;
    for (Index i = 0; i < z.size(); ++i) sum += logistic_loss(z[i]);
    return sum;
}

Vector oracle_gradient(const ConstraintMatrix& A, const Vector& lambda) {
    const Vector z = A.entries().transpose() * lambda;
    Vector slope(z.size());
    for (Index i = 0; i < z.size(); ++i) slope[i] = logistic_slope(z[i]);
    return A.entries() * slope;
}

Vector l1_project(const Vector& v, double radius) {
    if (radius < 0.0) throw std::invalid_argument("l1_project: radius must be nonnegative");
    if (v.lpNorm<1>() <= radius) return v;
    if (radius == 0.0) return Vector::Zero(v.size());

    // Soft threshold at the tau that puts the result on the sphere.
    std::vector<double> mags(v.data(), v.data() + v.size());
    for (double& x : mags) x = std::abs(x);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (std::size_t k = 0; k < mags.size(); ++k) {
        cumulative += mags[k];
        const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
        if (mags[k] > candidate) tau = candidate;
    }
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        const double shrunk = std::max(std::abs(v[i]) - tau, 0.0);
        out[i] = v[i] < 0.0 ? -shrunk : shrunk;
    }
    return out;
}

Vector box_project(const Vector& v, const Vector& u) {
    if (v.size() != u.size()) throw std::invalid_argument("box_project: dimension mismatch");
    return v.cwiseMax(-u).cwiseMin(u);
}

OracleResult oracle_solve(const ConstraintMatrix& A, const OracleConfig& cfg) {
    if (!(cfg.step_size > 0.0)) throw std::invalid_argument("oracle: step size must be positive");
    if (cfg.max_iters < 1) throw std::invalid_argument("oracle: max_iters must be positive");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("oracle: tol must be positive");
    cfg.constraint.validate(A.features());

    // Accelerated projected gradient with backtracking on the Lipschitz
    // estimate and a gradient-based restart. Near the optimum the objective
    // changes fall below rounding, so the restart test avoids comparing them.
    OracleResult res;
    Vector lambda = Vector::Zero(A.features());
    double f = oracle_objective(A, lambda);
    Vector y = lambda;
    double t = 1.0;
    double lipschitz = 1.0 / cfg.step_size;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const Vector g_lambda = oracle_gradient(A, lambda);
        res.projected_gradient_norm =
            (lambda - project(cfg.constraint, lambda - g_lambda)).cwiseAbs().maxCoeff();
        if (res.projected_gradient_norm <= cfg.tol) {
            res.converged = true;
            break;
        }
        res.iterations = it + 1;

        const double f_y = oracle_objective(A, y);
        const Vector g_y = oracle_gradient(A, y);
        lipschitz = std::max(lipschitz * 0.8, 1.0 / kMaxStep);
        Vector x;
        double f_x = 0.0;
        while (true) {
            x = project(cfg.constraint, y - g_y / lipschitz);
            f_x = oracle_objective(A, x);
            const Vector d = x - y;
            if (f_x <= f_y + g_y.dot(d) + 0.5 * lipschitz * d.squaredNorm() + 1e-15 * std::abs(f_y)) break;
            lipschitz *= 2.0;
            if (!std::isfinite(lipschitz)) break;
        }
        if ((y - x).dot(x - lambda) > 0.0) {
            // Momentum points uphill: restart from the last iterate.
            y = lambda;
            t = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x + ((t - 1.0) / t_next) * (x - lambda);
        t = t_next;
        lambda = std::move(x);
        f = f_x;
    }
    res.lambda = std::move(lambda);
    res.objective = f;
    return res;
}

}  // namespace breglr
