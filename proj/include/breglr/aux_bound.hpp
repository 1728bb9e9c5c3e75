#pragma once

// Auxiliary upper bound on the per-step loss change and its coordinatewise
// W+/W- split, which decouples the step into n one-dimensional problems.

#include "breglr/bregman.hpp"

namespace breglr {

/// Exponents are clamped to [-kExponentClamp, kExponentClamp] before exp().
inline constexpr double kExponentClamp = 500.0;

struct CoordWeights {
    Vector w_plus;   // sum of q_i |A_ji| over A_ji > 0
    Vector w_minus;  // sum of q_i |A_ji| over A_ji < 0
};

/// A(delta, q) = sum_i q_i (exp(-(delta^T A)_i) - 1).
double auxiliary_value(const Vector& delta, const DistPoint& q, const ConstraintMatrix& A);

CoordWeights coord_weights(const DistPoint& q, const ConstraintMatrix& A);

/// G(d) = w+ (e^{-d} - 1) + w- (e^{d} - 1) and its first two derivatives.
double coord_loss(double delta, double w_plus, double w_minus) noexcept;
double coord_loss_grad(double delta, double w_plus, double w_minus) noexcept;
double coord_loss_hess(double delta, double w_plus, double w_minus) noexcept;

/// argmin of G over the real line, 0.5 ln(w+/w-). Infinite when exactly one
/// weight vanishes, 0 when both do.
double coord_loss_argmin(double w_plus, double w_minus) noexcept;

}  // namespace breglr
