#pragma once

// Command-line driver: train, eval, bench and synth.

#include "breglr/budget.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace breglr::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kNotConverged = 3,
};

/// Scaled features carry a 1/(n+1) factor, so useful weights grow with n.
inline constexpr double kDefaultBudgetPerFeature = 10.0;

enum class Command { Train, Eval, Bench, Synth };

struct RunConfig {
    Command command = Command::Train;

    std::filesystem::path data;
    std::filesystem::path model;  // eval input
    int label_col = 0;
    std::string positive_label = "1";
    std::optional<int> bag_col;

    /// Unset means kDefaultBudgetPerFeature per row of the constraint matrix
    /// (aggregate) or per coordinate (per-coord).
    std::optional<double> budget;
    BudgetMode budget_mode = BudgetMode::Aggregate;
    double large_budget = 1000.0;  // per-coordinate box of the unregularized run

    double mu0 = 1.0;
    double mu_shrink = 0.2;
    double tol = 1e-6;  // relative loss decrease that stops the outer loop
    int max_iter = 500;
    double drop_threshold = 1e-6;

    double test_fraction = 0.5;
    std::uint64_t seed = 1;
    std::filesystem::path out = ".";

    Index synth_dim = 20;
    Index synth_train = 200;
    Index synth_test = 200;
    double synth_noise = 0.3;
    Index synth_informative = 0;

    /// Throws std::invalid_argument describing the first bad field.
    void validate() const;
};

int cmd_train(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_bench(const RunConfig& cfg);
int cmd_synth(const RunConfig& cfg);

/// Parses arguments and dispatches; returns the process exit code.
int run(int argc, char** argv);

}  // namespace breglr::cli
