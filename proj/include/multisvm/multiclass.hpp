#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multisvm/dataset.hpp"
#include "multisvm/svm_binary.hpp"

namespace multisvm {

struct ClassEntry {
    ClassCode code = 0;
    std::string name;

    friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

/// Ordered list of land-cover classes. Codes 0 and 255 are reserved for sentinels.
class ClassCatalog {
public:
    ClassCatalog() = default;
    explicit ClassCatalog(std::vector<ClassEntry> entries);

    /// Codes in ascending order, named "class_<code>".
    static ClassCatalog from_codes(std::span<const ClassCode> codes);
    /// Parses "1:water,2:vegetation,3:built_up".
    static ClassCatalog parse(std::string_view text);

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<ClassEntry>& entries() const noexcept { return entries_; }
    const ClassEntry& operator[](std::size_t index) const { return entries_[index]; }

    bool contains(ClassCode code) const noexcept;
    /// Position of `code` in catalog order; throws InputError when absent.
    std::size_t index_of(ClassCode code) const;
    const std::string& name_of(ClassCode code) const;

    std::string to_string() const;

    friend bool operator==(const ClassCatalog&, const ClassCatalog&) = default;

private:
    std::vector<ClassEntry> entries_;
};

enum class Strategy { OneAgainstOne, OneAgainstAll };
enum class Voting { Majority, Weighted };

std::string_view to_string(Strategy strategy) noexcept;
std::string_view to_string(Voting voting) noexcept;
Strategy parse_strategy(std::string_view text);
Voting parse_voting(std::string_view text);

/**
 * Binary machines combined under one decomposition strategy.
 *
 * One-against-one holds N(N-1)/2 machines, pairs in lexicographic catalog
 * order with the earlier class on the positive side. One-against-all holds
 * N machines in catalog order, negative_class 0 standing for "the rest".
 */
struct MulticlassModel {
    Strategy strategy = Strategy::OneAgainstOne;
    Voting voting = Voting::Majority;
    ClassCatalog catalog;
    std::vector<BinarySvmModel> machines;

    std::size_t dimensions() const noexcept { return machines.empty() ? 0 : machines.front().dimensions(); }

    /// Checks machine count and class tags against the strategy.
    void validate() const;

    friend bool operator==(const MulticlassModel&, const MulticlassModel&) = default;
};

std::size_t expected_machine_count(Strategy strategy, std::size_t classes) noexcept;

MulticlassModel train_multiclass(const LabeledDataset& dataset, const ClassCatalog& catalog, Strategy strategy,
                                 const KernelSpec& kernel, double cost, Voting voting = Voting::Majority,
                                 const TrainOptions& options = {});

/// Label plus the classes that claimed the pixel (1AA) or the vote tally (1A1).
struct Prediction {
    ClassCode label = kUnclassified;
    std::vector<ClassCode> positive_classes;
    std::vector<double> scores;  // per catalog entry
};

/// One pairwise outcome: the decision value of the machine for (positive, negative).
struct PairOutcome {
    ClassCode positive = 0;
    ClassCode negative = 0;
    double decision = 0.0;
};

/// Vote tally; a shared maximum yields UNCLASSIFIED. Never returns MIXED.
Prediction tally_votes(const ClassCatalog& catalog, std::span<const PairOutcome> outcomes, Voting voting);

/// One decision value per catalog entry. Strictly positive values claim the pixel.
Prediction resolve_one_against_all(const ClassCatalog& catalog, std::span<const double> decisions);

Prediction predict_1a1(const MulticlassModel& model, std::span<const double> x);
Prediction predict_1aa(const MulticlassModel& model, std::span<const double> x);
/// Dispatches on model.strategy.
ClassCode predict(const MulticlassModel& model, std::span<const double> x);

struct SpecialCounts {
    std::size_t unclassified = 0;
    std::size_t mixed = 0;

    friend bool operator==(const SpecialCounts&, const SpecialCounts&) = default;
};

SpecialCounts count_special(const LabelMap& labels) noexcept;

struct MulticlassCvResult {
    KernelSpec kernel;
    double cost = 0.0;
    std::vector<FoldScore> table;
};

/**
 * Grid search scored by stratified k-fold multiclass accuracy, averaged over
 * the listed strategies. UNCLASSIFIED and MIXED predictions count as errors.
 */
MulticlassCvResult cross_validate_multiclass(const LabeledDataset& dataset, const ClassCatalog& catalog,
                                             std::span<const Strategy> strategies,
                                             std::span<const KernelSpec> kernel_grid,
                                             std::span<const double> cost_grid, int folds, std::uint64_t seed,
                                             Voting voting = Voting::Majority, const TrainOptions& options = {});

}  // namespace multisvm
