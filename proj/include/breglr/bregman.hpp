#pragma once

// Bregman distances for the bit-entropy and unnormalized-entropy generators,
// the logistic Legendre transform, and the model distribution q(lambda).

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace breglr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when an argument lies outside the domain of an operation.
/// An infinite distance is a valid result and never raised as an error.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class GeneratorKind {
    LogisticEntropy,     // sum p ln p + (1-p) ln(1-p) on [0,1]^m
    UnnormalizedEntropy  // sum p ln p on the nonnegative orthant
};

struct Generator {
    GeneratorKind kind = GeneratorKind::LogisticEntropy;
    Index domain_dim = 0;
};

/// A point of the generator's domain; for the logistic generator every
/// coordinate is a per-example probability in [0,1].
class DistPoint {
public:
    DistPoint() = default;
    explicit DistPoint(Vector values) : values_(std::move(values)) {}

    /// (1/2) * 1, the default distribution with zero generator gradient.
    static DistPoint uniform_half(Index m) { return DistPoint(Vector::Constant(m, 0.5)); }

    const Vector& values() const noexcept { return values_; }
    Index size() const noexcept { return values_.size(); }
    double operator[](Index i) const { return values_[i]; }

    bool in_unit_box() const;
    bool strictly_interior() const;

private:
    Vector values_;
};

/// The n x m matrix with entries A(j, i) = y_i * h_j(x_i).
///
/// Rows are features (the intercept row, if any, is recorded), columns are
/// examples. The algorithm requires every column to have absolute sum at most
/// one; the constructor does not enforce that so callers can report it.
class ConstraintMatrix {
public:
    ConstraintMatrix() = default;

    /// `features` is n x m and already scaled; labels are +-1 per example.
    ConstraintMatrix(const Matrix& features, Eigen::VectorXi labels, Vector feature_scale,
                     std::optional<Index> intercept_row = std::nullopt);

    /// Builds directly from signed entries (labels all +1 by convention).
    static ConstraintMatrix from_entries(Matrix entries,
                                         std::optional<Index> intercept_row = std::nullopt);

    const Matrix& entries() const noexcept { return entries_; }
    const Eigen::VectorXi& labels() const noexcept { return labels_; }
    const Vector& feature_scale() const noexcept { return feature_scale_; }
    std::optional<Index> intercept_row() const noexcept { return intercept_row_; }

    Index features() const noexcept { return entries_.rows(); }
    Index examples() const noexcept { return entries_.cols(); }

    double max_column_l1() const;
    bool is_normalized(double slack = 1e-12) const;

    /// v = lambda^T A, i.e. the signed margins y_i f(x_i).
    Vector margins(const Vector& lambda) const;

private:
    Matrix entries_;
    Eigen::VectorXi labels_;
    Vector feature_scale_;
    std::optional<Index> intercept_row_;
};

/// sigma(x) = 1 / (1 + e^x), with the decreasing sign convention.
double sigmoid(double x) noexcept;

/// ln(1 + e^x) without overflow.
double softplus(double x) noexcept;

/// F(p) for the chosen generator, with 0 ln 0 = 0.
double generator_value(const Generator& gen, const DistPoint& p);

/// B_F(p || q). Returns +infinity when q sits on the boundary in a way that
/// makes a term unbounded; throws DomainError for points outside the domain.
double bregman_distance(const Generator& gen, const DistPoint& p, const DistPoint& q);

/// D_B(0 || q) = -sum ln(1 - q_i). Infinite if any q_i == 1.
double loss_at_zero(const DistPoint& q);

/// sum_i ln(1 + e^{-v_i}); equals loss_at_zero(model_distribution) but stays
/// finite for margins whose sigmoid rounds to 0 or 1.
double log_loss_from_margins(const Vector& margins);

/// L_F(v, q)_i = q_i e^{-v_i} / (1 - q_i + q_i e^{-v_i}).
DistPoint legendre_transform(const Vector& v, const DistPoint& q);

/// q_i = sigma((lambda^T A)_i) = L_F(lambda^T A, q0).
DistPoint model_distribution(const ConstraintMatrix& A, const Vector& lambda);

}  // namespace breglr
