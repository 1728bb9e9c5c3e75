#include "breglr/budget.hpp"

#include <cmath>
#include <stdexcept>

namespace breglr {

Budget Budget::uniform(Index n, double u) {
    Budget b;
    b.mode = BudgetMode::PerCoordinate;
    b.per_coord = Vector::Constant(n, u);
    b.aggregate = u * static_cast<double>(n);
    return b;
}

Budget Budget::from_aggregate(Index n, double c, BudgetMode mode) {
    if (n <= 0) throw std::invalid_argument("budget: need at least one coordinate");
    Budget b;
    b.mode = mode;
    b.aggregate = c;
    b.per_coord = Vector::Constant(n, c / static_cast<double>(n));
    return b;
}

void Budget::validate(Index n) const {
    if (mode == BudgetMode::PerCoordinate) {
        if (per_coord.size() != n) throw std::invalid_argument("budget: size does not match features");
        for (Index j = 0; j < n; ++j) {
            if (!(per_coord[j] >= 0.0) || std::isnan(per_coord[j])) {
                throw std::invalid_argument("budget: per-coordinate budgets must be nonnegative");
            }
        }
    } else if (!(aggregate >= 0.0) || std::isnan(aggregate)) {
        throw std::invalid_argument("budget: aggregate radius must be nonnegative");
    }
}

bool Budget::contains(const Vector& lambda, double slack) const {
    if (mode == BudgetMode::Aggregate) return lambda.lpNorm<1>() <= aggregate + slack;
    if (lambda.size() != per_coord.size()) return false;
    return ((lambda.cwiseAbs() - per_coord).array() <= slack).all();
}

}  // namespace breglr
