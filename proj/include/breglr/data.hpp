#pragma once

// Datasets, CSV ingestion, feature scaling into the normalized constraint
// matrix, synthetic noisy-hyperplane data and stratified splitting.

#include "breglr/bregman.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace breglr {

/// Raised for unreadable or malformed input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ColumnNormalization {
    UniformDivisor,  // every scaled feature divided by (raw dims + 1)
    PerExample       // every example divided by its own absolute sum
};

/// Affine map of raw features into [-1, 1], then the column normalization.
/// Fitted on training data and reused unchanged at prediction time.
struct FeatureScaling {
    Vector min;
    Vector max;
    std::vector<bool> constant;  // max == min; such features map to 0
    double divisor = 1.0;
    bool intercept = true;
    ColumnNormalization mode = ColumnNormalization::UniformDivisor;

    Index raw_dims() const noexcept { return min.size(); }
    /// Number of rows of the constraint matrix (raw dims + intercept).
    Index output_dims() const noexcept { return min.size() + (intercept ? 1 : 0); }

    /// h(x) for one raw instance. Values outside the training range are
    /// clipped to [-1, 1] before division.
    Vector apply(const Vector& raw) const;
    /// Inverse of apply() for UniformDivisor scaling of in-range values.
    /// Constant features come back as their training value.
    Vector invert(const Vector& scaled) const;
};

struct Dataset {
    Matrix features;  // m instances x n raw features
    Eigen::VectorXi labels;
    std::string name;
    std::vector<std::string> feature_names;
    std::vector<std::string> groups;  // optional bag id per instance
    std::optional<FeatureScaling> scale_record;
    std::size_t rejected_rows = 0;

    Index instances() const noexcept { return features.rows(); }
    Index dims() const noexcept { return features.cols(); }
    Index positives() const noexcept { return (labels.array() == 1).count(); }

    /// Rows selected by index, groups carried along.
    Dataset subset(const std::vector<Index>& rows) const;
};

struct CsvOptions {
    int label_column = 0;
    std::string positive_label = "1";
    std::optional<int> group_column;
    std::optional<bool> header;  // auto-detected when unset
};

/// Reads a comma-separated file. Rows with a missing or non-numeric feature
/// cell are rejected and counted; more than two label tokens is an error.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Writes label, [group,] features with a header row; labels as "1"/"-1".
void write_csv(const Dataset& ds, const std::filesystem::path& path);

struct NormalizeOptions {
    bool intercept = true;
    ColumnNormalization mode = ColumnNormalization::UniformDivisor;
};

/// Fits min/max on `train` only.
FeatureScaling fit_scaling(const Dataset& train, const NormalizeOptions& options = {});

/// Builds A = y_i h_j(x_i) with a previously fitted scaling.
ConstraintMatrix constraint_matrix(const Dataset& ds, const FeatureScaling& scaling);

struct Normalized {
    Dataset dataset;  // scaled features (intercept included), scale_record set
    ConstraintMatrix matrix;
};

/// Fits the scaling on `ds` and applies it. Throws DataError for n == 0.
Normalized normalize(const Dataset& ds, const NormalizeOptions& options = {});

struct SynthOptions {
    Index dim = 20;
    Index m_train = 200;
    Index m_test = 200;
    double noise_sigma = 0.3;
    std::uint64_t seed = 1;
    /// Dimensions with a nonzero hyperplane coefficient; 0 means all.
    Index informative = 0;
};

struct SynthData {
    Dataset train;
    Dataset test;
    Vector hyperplane;
};

/// Uniform points in [-1,1]^dim labeled by a random hyperplane through the
/// origin; each instance then gets N(0, sigma^2 I) noise with probability 1/2.
SynthData synth_hyperplane(const SynthOptions& options);

struct Split {
    Dataset train;
    Dataset test;
};

/// Seeded stratified split; each class contributes round(fraction * count)
/// instances to the test side.
Split split(const Dataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace breglr
