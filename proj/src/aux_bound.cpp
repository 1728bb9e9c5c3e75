#include "breglr/aux_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace breglr {
namespace {

double clamped_exp(double x) noexcept {
    return std::exp(std::clamp(x, -kExponentClamp, kExponentClamp));
}

double clamped_expm1(double x) noexcept {
    return std::expm1(std::clamp(x, -kExponentClamp, kExponentClamp));
}

}  // namespace

double auxiliary_value(const Vector& delta, const DistPoint& q, const ConstraintMatrix& A) {
    if (q.size() != A.examples()) {
        throw std::invalid_argument("auxiliary_value: q size does not match examples");
    }
    const Vector v = A.margins(delta);
    double sum = 0.0;
    for (Index i = 0; i < v.size(); ++i) sum += q[i] * clamped_expm1(-v[i]);
    return sum;
}

CoordWeights coord_weights(const DistPoint& q, const ConstraintMatrix& A) {
    if (q.size() != A.examples()) {
        throw std::invalid_argument("coord_weights: q size does not match examples");
    }
    const Matrix& a = A.entries();
    CoordWeights w{Vector::Zero(a.rows()), Vector::Zero(a.rows())};
    for (Index i = 0; i < a.cols(); ++i) {
        const double qi = q[i];
        for (Index j = 0; j < a.rows(); ++j) {
            const double aji = a(j, i);
            if (aji > 0.0) {
                w.w_plus[j] += qi * aji;
            } else if (aji < 0.0) {
                w.w_minus[j] -= qi * aji;
            }
        }
    }
    return w;
}

double coord_loss(double delta, double w_plus, double w_minus) noexcept {
    return w_plus * clamped_expm1(-delta) + w_minus * clamped_expm1(delta);
}

double coord_loss_grad(double delta, double w_plus, double w_minus) noexcept {
    return -w_plus * clamped_exp(-delta) + w_minus * clamped_exp(delta);
}

double coord_loss_hess(double delta, double w_plus, double w_minus) noexcept {
    return w_plus * clamped_exp(-delta) + w_minus * clamped_exp(delta);
}

double coord_loss_argmin(double w_plus, double w_minus) noexcept {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (w_plus > 0.0 && w_minus > 0.0) return 0.5 * (std::log(w_plus) - std::log(w_minus));
    if (w_plus > 0.0) return inf;
    if (w_minus > 0.0) return -inf;
    return 0.0;
}

}  // namespace breglr
