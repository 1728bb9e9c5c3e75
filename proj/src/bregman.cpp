#include "breglr/bregman.hpp"

#include <cmath>
#include <limits>

namespace breglr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x ln x with the 0 ln 0 = 0 convention.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void require_same_size(const DistPoint& p, const DistPoint& q, Index dim) {
    if (p.size() != q.size()) {
        throw DomainError("bregman_distance: points differ in dimension");
    }
    if (dim > 0 && p.size() != dim) {
        throw DomainError("bregman_distance: point dimension does not match generator");
    }
}

void require_nonnegative(const DistPoint& p, const char* what) {
    for (Index i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
            throw DomainError(std::string(what) + ": coordinate outside the nonnegative orthant");
        }
    }
}

void require_unit_box(const DistPoint& p, const char* what) {
    if (!p.in_unit_box()) {
        throw DomainError(std::string(what) + ": coordinate outside [0,1]");
    }
}

// One term p ln(p/q) + (1-p) ln((1-p)/(1-q)).
double logistic_term(double p, double q) {
    double term = 0.0;
    if (p > 0.0) {
        if (q <= 0.0) return kInf;
        term += p * (std::log(p) - std::log(q));
    }
    const double pc = 1.0 - p;
    if (pc > 0.0) {
        if (q >= 1.0) return kInf;
        term += pc * (std::log1p(-p) - std::log1p(-q));
    }
    return term;
}

// One term p ln(p/q) + q - p.
double unnormalized_term(double p, double q) {
    if (p > 0.0) {
        if (q <= 0.0) return kInf;
        return p * (std::log(p) - std::log(q)) + q - p;
    }
    return q;
}

}  // namespace

bool DistPoint::in_unit_box() const {
    for (Index i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!(v >= 0.0 && v <= 1.0)) return false;
    }
    return true;
}

bool DistPoint::strictly_interior() const {
    for (Index i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!(v > 0.0 && v < 1.0)) return false;
    }
    return true;
}

ConstraintMatrix::ConstraintMatrix(const Matrix& features, Eigen::VectorXi labels,
                                   Vector feature_scale, std::optional<Index> intercept_row)
    : labels_(std::move(labels)),
      feature_scale_(std::move(feature_scale)),
      intercept_row_(intercept_row) {
    if (features.cols() != labels_.size()) {
        throw std::invalid_argument("ConstraintMatrix: label count does not match examples");
    }
    if (feature_scale_.size() != features.rows()) {
        throw std::invalid_argument("ConstraintMatrix: feature_scale size does not match features");
    }
    for (Index i = 0; i < labels_.size(); ++i) {
        if (labels_[i] != 1 && labels_[i] != -1) {
            throw std::invalid_argument("ConstraintMatrix: labels must be +1 or -1");
        }
    }
    if (intercept_row_ && (*intercept_row_ < 0 || *intercept_row_ >= features.rows())) {
        throw std::invalid_argument("ConstraintMatrix: intercept row out of range");
    }
    entries_ = features.array().rowwise() * labels_.cast<double>().transpose().array();
}

ConstraintMatrix ConstraintMatrix::from_entries(Matrix entries, std::optional<Index> intercept_row) {
    const Index m = entries.cols();
    const Index n = entries.rows();
    return ConstraintMatrix(entries, Eigen::VectorXi::Ones(m), Vector::Ones(n), intercept_row);
}

double ConstraintMatrix::max_column_l1() const {
    if (entries_.size() == 0) return 0.0;
    return entries_.cwiseAbs().colwise().sum().maxCoeff();
}

bool ConstraintMatrix::is_normalized(double slack) const {
    if (!entries_.allFinite()) return false;
    return max_column_l1() <= 1.0 + slack;
}

Vector ConstraintMatrix::margins(const Vector& lambda) const {
    if (lambda.size() != entries_.rows()) {
        throw std::invalid_argument("margins: parameter vector size does not match features");
    }
    return entries_.transpose() * lambda;
}

double sigmoid(double x) noexcept {
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double softplus(double x) noexcept {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double generator_value(const Generator& gen, const DistPoint& p) {
    if (gen.domain_dim > 0 && p.size() != gen.domain_dim) {
        throw DomainError("generator_value: point dimension does not match generator");
    }
    double sum = 0.0;
    if (gen.kind == GeneratorKind::LogisticEntropy) {
        require_unit_box(p, "generator_value");
        for (Index i = 0; i < p.size(); ++i) sum += xlogx(p[i]) + xlogx(1.0 - p[i]);
    } else {
        require_nonnegative(p, "generator_value");
        for (Index i = 0; i < p.size(); ++i) sum += xlogx(p[i]);
    }
    return sum;
}

double bregman_distance(const Generator& gen, const DistPoint& p, const DistPoint& q) {
    require_same_size(p, q, gen.domain_dim);
    double sum = 0.0;
    if (gen.kind == GeneratorKind::LogisticEntropy) {
        require_unit_box(p, "bregman_distance");
        require_unit_box(q, "bregman_distance");
        for (Index i = 0; i < p.size(); ++i) {
            const double term = logistic_term(p[i], q[i]);
            if (std::isinf(term)) return kInf;
            sum += term;
        }
    } else {
        require_nonnegative(p, "bregman_distance");
        require_nonnegative(q, "bregman_distance");
        for (Index i = 0; i < p.size(); ++i) {
            const double term = unnormalized_term(p[i], q[i]);
            if (std::isinf(term)) return kInf;
            sum += term;
        }
    }
    // Rounding can leave a tiny negative value when p is very close to q.
    return sum < 0.0 ? 0.0 : sum;
}

double loss_at_zero(const DistPoint& q) {
    require_unit_box(q, "loss_at_zero");
    double sum = 0.0;
    for (Index i = 0; i < q.size(); ++i) {
        if (q[i] >= 1.0) return kInf;
        sum += 0.0 - std::log1p(-q[i]);
    }
    return sum;
}

double log_loss_from_margins(const Vector& margins) {
    double sum = 0.0;
    for (Index i = 0; i < margins.size(); ++i) sum += softplus(-margins[i]);
    return sum;
}

DistPoint legendre_transform(const Vector& v, const DistPoint& q) {
    if (v.size() != q.size()) {
        throw DomainError("legendre_transform: v and q differ in dimension");
    }
    if (!q.strictly_interior()) {
        throw DomainError("legendre_transform: q must lie strictly inside (0,1)^m");
    }
    Vector out(q.size());
    for (Index i = 0; i < q.size(); ++i) {
        const double qi = q[i];
        const double vi = v[i];
        if (vi > 0.0) {
            // e^{-v} <= 1 here, the direct form cannot overflow.
            const double e = std::exp(-vi);
            out[i] = qi * e / (1.0 - qi + qi * e);
        } else {
            // Divide through by q e^{-v}; e^{v} <= 1.
            out[i] = 1.0 / (1.0 + ((1.0 - qi) / qi) * std::exp(vi));
        }
    }
    return DistPoint(std::move(out));
}

DistPoint model_distribution(const ConstraintMatrix& A, const Vector& lambda) {
    const Vector v = A.margins(lambda);
    Vector q(v.size());
    for (Index i = 0; i < v.size(); ++i) q[i] = sigmoid(v[i]);
    return DistPoint(std::move(q));
}

}  // namespace breglr
