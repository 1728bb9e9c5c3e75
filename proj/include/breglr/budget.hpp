#pragma once

#include "breglr/bregman.hpp"

namespace breglr {

enum class BudgetMode {
    PerCoordinate,  // |lambda_j| <= u_j for every j
    Aggregate       // ||lambda||_1 <= c
};

/// The feasible set for the weights, shared by the trainer and the oracle.
struct Budget {
    BudgetMode mode = BudgetMode::PerCoordinate;
    Vector per_coord;       // u_j, used in PerCoordinate mode
    double aggregate = 0.0; // c, used in Aggregate mode

    /// Every coordinate gets the same box |lambda_j| <= u.
    static Budget uniform(Index n, double u);
    /// An L1 radius c. In PerCoordinate mode it is split evenly, u_j = c / n.
    static Budget from_aggregate(Index n, double c, BudgetMode mode);

    Index size() const noexcept { return per_coord.size(); }
    void validate(Index n) const;
    bool contains(const Vector& lambda, double slack = 1e-9) const;
};

}  // namespace breglr
