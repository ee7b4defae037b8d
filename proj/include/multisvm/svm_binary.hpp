#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "multisvm/dataset.hpp"
#include "multisvm/kernels.hpp"

namespace multisvm {

/// Two-class training material. Labels are -1 or +1.
struct BinaryProblem {
    std::vector<FeatureVector> samples;
    std::vector<int> labels;
    double cost = 1.0;

    void validate() const;
};

/// Per-feature affine scaling (x - mean) / stddev, fitted on training samples.
struct Standardizer {
    std::vector<double> means;
    std::vector<double> stddevs;

    /// Population statistics; features with zero spread get stddev 1.
    static Standardizer fit(std::span<const FeatureVector> samples);
    static Standardizer identity(std::size_t dimensions);

    std::size_t dimensions() const noexcept { return means.size(); }
    FeatureVector apply(std::span<const double> x) const;

    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

/**
 * One trained two-class machine.
 *
 * Support vectors are stored in the standardized space;
 * decision_value() scales raw input before evaluating the kernel expansion.
 */
struct BinarySvmModel {
    KernelSpec kernel;
    double cost = 1.0;
    Standardizer scaling;
    std::vector<FeatureVector> support_vectors;
    std::vector<double> dual_coefs;  // alpha_i * y_i
    double bias = 0.0;
    // Attached by the multiclass layer; 0 means "all other classes" for a negative side.
    ClassCode positive_class = 0;
    ClassCode negative_class = 0;

    std::size_t dimensions() const noexcept { return scaling.dimensions(); }

    friend bool operator==(const BinarySvmModel&, const BinarySvmModel&) = default;
};

struct TrainOptions {
    double tolerance = 1e-3;
    int max_passes = 100;  // iteration budget is max_passes * sample count
    bool standardize = true;
};

/// Full dual solution of a training run, kept for verification.
struct TrainResult {
    BinarySvmModel model;
    std::vector<double> alphas;          // one per training sample, in input order
    std::vector<FeatureVector> scaled;   // training samples after standardization
    double dual_objective = 0.0;
    std::size_t iterations = 0;
};

/// Solves the soft-margin dual with SMO and returns the full solution.
TrainResult train_detailed(const BinaryProblem& problem, const KernelSpec& kernel,
                           const TrainOptions& options = {});

BinarySvmModel train(const BinaryProblem& problem, const KernelSpec& kernel,
                     const TrainOptions& options = {});

/// f(x) = sum_i coef_i K(sv_i, scale(x)) + bias.
double decision_value(const BinarySvmModel& model, std::span<const double> x);

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(std::span<const double> alphas, std::span<const int> labels, const GramMatrix& gram);

/// Stratified fold index per sample, reproducible from seed.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

struct FoldScore {
    std::size_t kernel_index = 0;
    double cost = 0.0;
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0.0;
    bool failed = false;  // at least one fold did not converge

    friend bool operator==(const FoldScore&, const FoldScore&) = default;
};

struct CrossValidationResult {
    KernelSpec kernel;
    double cost = 0.0;
    std::vector<FoldScore> table;  // kernel-major, costs in grid order
};

/**
 * Picks the (kernel, cost) pair with the highest mean stratified k-fold
 * accuracy. Ties go to the smaller cost, then to the earlier grid entry.
 */
CrossValidationResult cross_validate(const BinaryProblem& dataset, std::span<const KernelSpec> kernel_grid,
                                     std::span<const double> cost_grid, int folds, std::uint64_t seed,
                                     const TrainOptions& options = {});

/// Shared selection rule; `table` must be kernel-major with costs in grid order.
std::size_t select_best(std::span<const FoldScore> table);

}  // namespace multisvm
