#pragma once

// Confusion-matrix metrics, trace and metrics CSV writers, and the model file.

#include "breglr/data.hpp"
#include "breglr/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace breglr {

struct MetricsReport {
    std::string method;
    long tp = 0;
    long fn = 0;
    long fp = 0;
    long tn = 0;
    double accuracy = 0.0;
    Index active_features = 0;
    double final_loss = 0.0;

    long total() const noexcept { return tp + fn + fp + tn; }
};

/// Confusion counts for +-1 predictions against +-1 truth.
MetricsReport confusion(const std::vector<int>& predicted, const Eigen::VectorXi& actual);

/// Molecule-level counts: a group is predicted positive if any member is.
/// Every member of a group must carry the same true label.
MetricsReport group_confusion(const std::vector<int>& predicted, const Eigen::VectorXi& actual,
                              const std::vector<std::string>& groups);

/// Predicted labels for every instance of a raw dataset.
std::vector<int> predict_labels(const ParamVector& params, const FeatureScaling& scaling,
                                const Dataset& ds);

/// iter,loss,train_err,test_err,active_features,max_abs_delta
void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace);

/// method,TP,FN,FP,TN,accuracy,active_features,final_loss
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsReport>& rows);

struct Model {
    ParamVector params;
    FeatureScaling scaling;
};

inline constexpr const char* kModelHeader = "breglr-model 1";

void save_model(const std::filesystem::path& path, const Model& model);
/// Throws DataError on a missing file, wrong version tag or malformed body.
Model load_model(const std::filesystem::path& path);

}  // namespace breglr
