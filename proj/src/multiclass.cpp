#include "multisvm/multiclass.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "multisvm/error.hpp"

namespace multisvm {

namespace {

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::size_t> class_counts(const LabeledDataset& dataset, const ClassCatalog& catalog) {
    std::vector<std::size_t> counts(catalog.size(), 0);
    for (ClassCode label : dataset.labels) {
        if (!catalog.contains(label)) {
            throw InputError("dataset label " + std::to_string(label) + " is not in the class catalog");
        }
        ++counts[catalog.index_of(label)];
    }
    return counts;
}

// Unique argmax or UNCLASSIFIED on a shared maximum.
ClassCode unique_argmax(const ClassCatalog& catalog, std::span<const double> scores) {
    std::size_t best = 0;
    bool shared = false;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best]) {
            best = k;
            shared = false;
        } else if (scores[k] == scores[best]) {
            shared = true;
        }
    }
    return shared ? kUnclassified : catalog[best].code;
}

}  // namespace

ClassCatalog::ClassCatalog(std::vector<ClassEntry> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) throw InputError("class catalog needs at least 2 classes");
    std::set<ClassCode> seen;
    for (const auto& e : entries_) {
        if (e.code == kUnclassified || e.code == kMixed) {
            throw InputError("class code " + std::to_string(e.code) + " is reserved");
        }
        if (!seen.insert(e.code).second) throw InputError("duplicate class code " + std::to_string(e.code));
    }
}

ClassCatalog ClassCatalog::from_codes(std::span<const ClassCode> codes) {
    std::set<ClassCode> unique(codes.begin(), codes.end());
    std::vector<ClassEntry> entries;
    for (ClassCode c : unique) entries.push_back({c, "class_" + std::to_string(c)});
    return ClassCatalog(std::move(entries));
}

ClassCatalog ClassCatalog::parse(std::string_view text) {
    std::vector<ClassEntry> entries;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
        if (!item.empty()) {
            const auto colon = item.find(':');
            const std::string code_text = trim(std::string_view(item).substr(0, colon));
            int code = -1;
            const auto [ptr, ec] = std::from_chars(code_text.data(), code_text.data() + code_text.size(), code);
            if (ec != std::errc() || ptr != code_text.data() + code_text.size() || code < 0 || code > 255) {
                throw InputError("bad class code in catalog entry '" + item + "'");
            }
            std::string name = colon == std::string::npos ? "class_" + code_text : trim(item.substr(colon + 1));
            if (name.empty()) throw InputError("empty class name in catalog entry '" + item + "'");
            entries.push_back({static_cast<ClassCode>(code), std::move(name)});
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return ClassCatalog(std::move(entries));
}

bool ClassCatalog::contains(ClassCode code) const noexcept {
    return std::any_of(entries_.begin(), entries_.end(), [code](const ClassEntry& e) { return e.code == code; });
}

std::size_t ClassCatalog::index_of(ClassCode code) const {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (entries_[k].code == code) return k;
    }
    throw InputError("class code " + std::to_string(code) + " is not in the catalog");
}

const std::string& ClassCatalog::name_of(ClassCode code) const { return entries_[index_of(code)].name; }

std::string ClassCatalog::to_string() const {
    std::string out;
    for (const auto& e : entries_) {
        if (!out.empty()) out += ',';
        out += std::to_string(e.code) + ":" + e.name;
    }
    return out;
}

std::string_view to_string(Strategy strategy) noexcept {
    return strategy == Strategy::OneAgainstOne ? "one-against-one" : "one-against-all";
}

std::string_view to_string(Voting voting) noexcept { return voting == Voting::Majority ? "majority" : "weighted"; }

Strategy parse_strategy(std::string_view text) {
    if (text == "1a1" || text == "one-against-one" || text == "ovo") return Strategy::OneAgainstOne;
    if (text == "1aa" || text == "one-against-all" || text == "ova") return Strategy::OneAgainstAll;
    throw InputError("unknown strategy '" + std::string(text) + "'");
}

Voting parse_voting(std::string_view text) {
    if (text == "majority") return Voting::Majority;
    if (text == "weighted") return Voting::Weighted;
    throw InputError("unknown voting mode '" + std::string(text) + "'");
}

std::size_t expected_machine_count(Strategy strategy, std::size_t classes) noexcept {
    return strategy == Strategy::OneAgainstOne ? classes * (classes - 1) / 2 : classes;
}

void MulticlassModel::validate() const {
    const std::size_t n = catalog.size();
    if (machines.size() != expected_machine_count(strategy, n)) {
        throw InputError("model holds " + std::to_string(machines.size()) + " machines, " +
                         std::string(to_string(strategy)) + " over " + std::to_string(n) + " classes needs " +
                         std::to_string(expected_machine_count(strategy, n)));
    }
    std::size_t m = 0;
    if (strategy == Strategy::OneAgainstOne) {
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b, ++m) {
                if (machines[m].positive_class != catalog[a].code || machines[m].negative_class != catalog[b].code) {
                    throw InputError("machine " + std::to_string(m) + " is not tagged with pair (" +
                                     std::to_string(catalog[a].code) + ", " + std::to_string(catalog[b].code) + ")");
                }
            }
        }
    } else {
        for (; m < n; ++m) {
            if (machines[m].positive_class != catalog[m].code || machines[m].negative_class != 0) {
                throw InputError("machine " + std::to_string(m) + " is not tagged with class " +
                                 std::to_string(catalog[m].code) + " versus the rest");
            }
        }
    }
    for (const auto& machine : machines) {
        if (machine.dimensions() != dimensions()) throw InputError("machines disagree on feature dimensionality");
    }
}

MulticlassModel train_multiclass(const LabeledDataset& dataset, const ClassCatalog& catalog, Strategy strategy,
                                 const KernelSpec& kernel, double cost, Voting voting, const TrainOptions& options) {
    dataset.validate();
    if (catalog.size() < 2) throw InputError("class catalog needs at least 2 classes");
    const auto counts = class_counts(dataset, catalog);
    for (std::size_t k = 0; k < catalog.size(); ++k) {
        if (counts[k] < 2) {
            throw InputError("class " + std::to_string(catalog[k].code) + " (" + catalog[k].name + ") has " +
                             std::to_string(counts[k]) + " training samples, at least 2 are required");
        }
    }

    MulticlassModel model;
    model.strategy = strategy;
    model.voting = voting;
    model.catalog = catalog;

    const auto train_one = [&](BinaryProblem problem, ClassCode positive, ClassCode negative) {
        problem.cost = cost;
        BinarySvmModel machine = train(problem, kernel, options);
        machine.positive_class = positive;
        machine.negative_class = negative;
        model.machines.push_back(std::move(machine));
    };

    if (strategy == Strategy::OneAgainstOne) {
        for (std::size_t a = 0; a < catalog.size(); ++a) {
            for (std::size_t b = a + 1; b < catalog.size(); ++b) {
                BinaryProblem problem;
                for (std::size_t i = 0; i < dataset.size(); ++i) {
                    if (dataset.labels[i] == catalog[a].code || dataset.labels[i] == catalog[b].code) {
                        problem.samples.push_back(dataset.features[i]);
                        problem.labels.push_back(dataset.labels[i] == catalog[a].code ? 1 : -1);
                    }
                }
                train_one(std::move(problem), catalog[a].code, catalog[b].code);
            }
        }
    } else {
        for (std::size_t a = 0; a < catalog.size(); ++a) {
            BinaryProblem problem;
            problem.samples = dataset.features;
            problem.labels.reserve(dataset.size());
            for (ClassCode label : dataset.labels) problem.labels.push_back(label == catalog[a].code ? 1 : -1);
            train_one(std::move(problem), catalog[a].code, 0);
        }
    }
    return model;
}

Prediction tally_votes(const ClassCatalog& catalog, std::span<const PairOutcome> outcomes, Voting voting) {
    Prediction p;
    p.scores.assign(catalog.size(), 0.0);
    for (const auto& o : outcomes) {
        const ClassCode winner = o.decision >= 0.0 ? o.positive : o.negative;
        p.scores[catalog.index_of(winner)] += voting == Voting::Majority ? 1.0 : std::abs(o.decision);
    }
    p.label = unique_argmax(catalog, p.scores);
    return p;
}

Prediction resolve_one_against_all(const ClassCatalog& catalog, std::span<const double> decisions) {
    if (decisions.size() != catalog.size()) {
        throw InputError("expected " + std::to_string(catalog.size()) + " decision values, got " +
                         std::to_string(decisions.size()));
    }
    Prediction p;
    p.scores.assign(decisions.begin(), decisions.end());
    for (std::size_t k = 0; k < decisions.size(); ++k) {
        if (decisions[k] > 0.0) p.positive_classes.push_back(catalog[k].code);
    }
    if (p.positive_classes.empty()) {
        p.label = kUnclassified;
    } else if (p.positive_classes.size() == 1) {
        p.label = p.positive_classes.front();
    } else {
        p.label = kMixed;
    }
    return p;
}

Prediction predict_1a1(const MulticlassModel& model, std::span<const double> x) {
    if (model.strategy != Strategy::OneAgainstOne) throw InputError("predict_1a1 called on a one-against-all model");
    std::vector<PairOutcome> outcomes;
    outcomes.reserve(model.machines.size());
    for (const auto& machine : model.machines) {
        outcomes.push_back({machine.positive_class, machine.negative_class, decision_value(machine, x)});
    }
    return tally_votes(model.catalog, outcomes, model.voting);
}

Prediction predict_1aa(const MulticlassModel& model, std::span<const double> x) {
    if (model.strategy != Strategy::OneAgainstAll) throw InputError("predict_1aa called on a one-against-one model");
    std::vector<double> decisions;
    decisions.reserve(model.machines.size());
    for (const auto& machine : model.machines) decisions.push_back(decision_value(machine, x));
    return resolve_one_against_all(model.catalog, decisions);
}

ClassCode predict(const MulticlassModel& model, std::span<const double> x) {
    return model.strategy == Strategy::OneAgainstOne ? predict_1a1(model, x).label : predict_1aa(model, x).label;
}

SpecialCounts count_special(const LabelMap& labels) noexcept {
    SpecialCounts counts;
    for (ClassCode c : labels.labels) {
        if (c == kUnclassified) ++counts.unclassified;
        else if (c == kMixed) ++counts.mixed;
    }
    return counts;
}

MulticlassCvResult cross_validate_multiclass(const LabeledDataset& dataset, const ClassCatalog& catalog,
                                             std::span<const Strategy> strategies,
                                             std::span<const KernelSpec> kernel_grid,
                                             std::span<const double> cost_grid, int folds, std::uint64_t seed,
                                             Voting voting, const TrainOptions& options) {
    if (kernel_grid.empty() || cost_grid.empty() || strategies.empty()) {
        throw InputError("cross-validation grids must be nonempty");
    }
    dataset.validate();
    class_counts(dataset, catalog);
    std::vector<int> keys(dataset.labels.begin(), dataset.labels.end());
    const std::vector<int> assignment = stratified_folds(keys, folds, seed);

    std::vector<LabeledDataset> train_parts(static_cast<std::size_t>(folds));
    std::vector<std::vector<std::size_t>> held_out(static_cast<std::size_t>(folds));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (int f = 0; f < folds; ++f) {
            if (assignment[i] == f) held_out[f].push_back(i);
            else train_parts[f].add(dataset.features[i], dataset.labels[i]);
        }
    }

    MulticlassCvResult result;
    for (std::size_t k = 0; k < kernel_grid.size(); ++k) {
        for (double cost : cost_grid) {
            FoldScore score;
            score.kernel_index = k;
            score.cost = cost;
            for (int f = 0; f < folds; ++f) {
                double accuracy = 0.0;
                for (Strategy strategy : strategies) {
                    try {
                        const MulticlassModel model = train_multiclass(train_parts[f], catalog, strategy,
                                                                       kernel_grid[k], cost, voting, options);
                        std::size_t correct = 0;
                        for (std::size_t i : held_out[f]) {
                            if (predict(model, dataset.features[i]) == dataset.labels[i]) ++correct;
                        }
                        accuracy += static_cast<double>(correct) / static_cast<double>(held_out[f].size());
                    } catch (const ConvergenceError&) {
                        score.failed = true;
                    }
                }
                score.fold_accuracies.push_back(accuracy / static_cast<double>(strategies.size()));
            }
            double total = 0.0;
            for (double a : score.fold_accuracies) total += a;
            score.mean_accuracy = total / static_cast<double>(folds);
            result.table.push_back(std::move(score));
        }
    }
    const std::size_t best = select_best(result.table);
    result.kernel = kernel_grid[result.table[best].kernel_index];
    result.cost = result.table[best].cost;
    return result;
}

}  // namespace multisvm
