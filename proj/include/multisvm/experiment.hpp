#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "multisvm/assessment.hpp"
#include "multisvm/multiclass.hpp"
#include "multisvm/raster_io.hpp"

namespace multisvm {

/// Linear, quadratic, cubic polynomial and RBF.
std::vector<KernelSpec> default_kernels();
std::vector<double> default_cost_grid();

struct ExperimentConfig {
    std::filesystem::path raster;
    std::filesystem::path train_samples;
    std::filesystem::path test_samples;
    std::optional<ClassCatalog> catalog;  // derived from the sample files when unset
    std::vector<KernelSpec> kernels = default_kernels();
    std::vector<double> cost_grid = default_cost_grid();
    int folds = 5;
    Voting voting = Voting::Majority;
    std::uint64_t seed = 42;
    std::filesystem::path output_dir;
    unsigned workers = 1;
    TrainOptions train_options;
};

struct StrategyOutcome {
    Strategy strategy = Strategy::OneAgainstOne;
    SpecialCounts special;
    ConfusionMatrix confusion;
    AccuracyReport accuracy;
    std::filesystem::path label_map;
    std::filesystem::path model;
};

struct KernelComparison {
    KernelSpec kernel;
    double cost = 0.0;
    std::vector<FoldScore> cv_table;
    StrategyOutcome one_against_one;
    StrategyOutcome one_against_all;
    ComparisonVerdict verdict;
};

struct ComparisonReport {
    ClassCatalog catalog;
    std::uint64_t seed = 0;
    std::vector<KernelComparison> rows;
};

/**
 * Runs the strategy comparison: per kernel, cross-validate the cost, train
 * both strategies with it, classify the raster, assess against the test
 * samples and compare kappas. Writes label maps, models and
 * report.txt / report.json into config.output_dir.
 *
 * Output bytes depend only on the inputs and seed, not on config.workers.
 */
ComparisonReport run_experiment(const ExperimentConfig& config);

std::string format_report_text(const ComparisonReport& report);
std::string format_report_json(const ComparisonReport& report);

}  // namespace multisvm
