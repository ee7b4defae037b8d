#include "multisvm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "multisvm/error.hpp"
#include "multisvm/file_util.hpp"
#include "multisvm/model_io.hpp"

namespace multisvm {

namespace {

using Json = nlohmann::ordered_json;

// Runs fn(0..count-1) on up to `workers` threads; rethrows the first failure by index.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(count);
    const auto run = [&](std::size_t k) {
        try {
            fn(k);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    if (workers <= 1 || count <= 1) {
        for (std::size_t k = 0; k < count; ++k) run(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < std::min<std::size_t>(workers, count); ++w) {
            threads.emplace_back([&] {
                for (std::size_t k = next++; k < count; k = next++) run(k);
            });
        }
        for (auto& t : threads) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// Re-raises the active library error with `context` prefixed, preserving its type.
[[noreturn]] void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(context + ": " + e.what(), e.diagnostics());
    } catch (const InputError& e) {
        throw InputError(context + ": " + e.what());
    } catch (const FormatError& e) {
        throw FormatError(context + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(context + ": " + e.what());
    } catch (const DegenerateError& e) {
        throw DegenerateError(context + ": " + e.what());
    }
}

std::string strategy_tag(Strategy s) { return s == Strategy::OneAgainstOne ? "1a1" : "1aa"; }

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json confusion_json(const ConfusionMatrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.row_count(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.classes(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json outcome_json(const StrategyOutcome& o) {
    Json j;
    j["strategy"] = std::string(to_string(o.strategy));
    j["unclassified_pixels"] = o.special.unclassified;
    j["mixed_pixels"] = o.special.mixed;
    j["overall_accuracy"] = o.accuracy.overall_accuracy;
    j["chance_agreement"] = o.accuracy.chance_agreement;
    j["kappa"] = o.accuracy.kappa;
    j["kappa_variance"] = o.accuracy.kappa_variance;
    j["reference_pixels"] = o.accuracy.n;
    Json producer = Json::array();
    Json user = Json::array();
    for (const auto& v : o.accuracy.producer_accuracy) producer.push_back(optional_json(v));
    for (const auto& v : o.accuracy.user_accuracy) user.push_back(optional_json(v));
    j["producer_accuracy"] = std::move(producer);
    j["user_accuracy"] = std::move(user);
    j["confusion_matrix"] = confusion_json(o.confusion);
    j["label_map"] = o.label_map.filename().string();
    j["model"] = o.model.filename().string();
    return j;
}

}  // namespace

std::vector<KernelSpec> default_kernels() {
    return {KernelSpec::linear(), KernelSpec::quadratic(), KernelSpec::polynomial(3), KernelSpec::rbf()};
}

std::vector<double> default_cost_grid() { return {0.1, 1.0, 10.0, 100.0}; }

ComparisonReport run_experiment(const ExperimentConfig& config) {
    if (config.kernels.empty()) throw InputError("experiment needs at least one kernel");
    if (config.cost_grid.empty()) throw InputError("experiment needs a nonempty cost grid");
    for (const auto& k : config.kernels) k.validate();
    if (config.output_dir.empty()) throw InputError("experiment needs an output directory");

    // Fail fast on the reference data before any training.
    const TrainingSamples test_samples = read_samples(config.test_samples);
    const auto* reference = std::get_if<std::vector<PixelSample>>(&test_samples);
    if (!reference) throw InputError(config.test_samples.string() + ": test samples must be given as row,col,class");
    if (reference->empty()) throw InputError(config.test_samples.string() + ": test sample set is empty");

    const RasterImage image = read_raster(config.raster);
    const TrainingSamples train_samples = read_samples(config.train_samples);
    const LabeledDataset train = to_dataset(image, train_samples);
    if (train.empty()) throw InputError(config.train_samples.string() + ": training sample set is empty");

    ComparisonReport report;
    report.seed = config.seed;
    if (config.catalog) {
        report.catalog = *config.catalog;
    } else {
        std::vector<ClassCode> codes = train.labels;
        for (const auto& s : *reference) codes.push_back(s.label);
        report.catalog = ClassCatalog::from_codes(codes);
    }
    for (const auto& s : *reference) {
        if (s.row >= image.rows || s.col >= image.cols) {
            throw InputError("test pixel at row " + std::to_string(s.row) + ", col " + std::to_string(s.col) +
                             " is outside the raster");
        }
        if (!report.catalog.contains(s.label)) {
            throw InputError("test class " + std::to_string(s.label) + " is not in the catalog");
        }
    }

    std::filesystem::create_directories(config.output_dir);
    const std::size_t kernel_count = config.kernels.size();
    report.rows.resize(kernel_count);
    const std::vector<Strategy> strategies{Strategy::OneAgainstOne, Strategy::OneAgainstAll};

    parallel_for(kernel_count, config.workers, [&](std::size_t k) {
        auto& row = report.rows[k];
        row.kernel = config.kernels[k].resolved(train.dimensions());
        try {
            const std::vector<KernelSpec> grid{config.kernels[k]};
            const auto cv = cross_validate_multiclass(train, report.catalog, strategies, grid, config.cost_grid,
                                                      config.folds, config.seed, config.voting, config.train_options);
            row.cost = cv.cost;
            row.cv_table = cv.table;
        } catch (const Error&) {
            rethrow_with_context("kernel " + config.kernels[k].label() + ", cross-validation");
        }
    });

    // Cells are (kernel, strategy); each worker writes only its own cell.
    parallel_for(kernel_count * 2, config.workers, [&](std::size_t cell) {
        auto& row = report.rows[cell / 2];
        const Strategy strategy = strategies[cell % 2];
        StrategyOutcome& out = strategy == Strategy::OneAgainstOne ? row.one_against_one : row.one_against_all;
        const std::string stem = row.kernel.label() + "_" + strategy_tag(strategy);
        try {
            const MulticlassModel model = train_multiclass(train, report.catalog, strategy, config.kernels[cell / 2],
                                                           row.cost, config.voting, config.train_options);
            const LabelMap map = classify_raster(model, image, 1);
            out.strategy = strategy;
            out.special = count_special(map);
            out.confusion = build_confusion(map, *reference, report.catalog);
            out.accuracy = kappa(out.confusion);
            out.label_map = config.output_dir / (stem + ".hdr");
            out.model = config.output_dir / (stem + ".model");
            write_labelmap(out.label_map, map);
            save_model(out.model, model);
        } catch (const Error&) {
            rethrow_with_context("kernel " + row.kernel.label() + ", " + std::string(to_string(strategy)));
        }
    });

    for (auto& row : report.rows) {
        try {
            row.verdict = z_test(row.one_against_one.accuracy, row.one_against_all.accuracy);
        } catch (const Error&) {
            rethrow_with_context("kernel " + row.kernel.label() + ", z-test");
        }
    }

    write_file_atomic(config.output_dir / "report.txt", format_report_text(report));
    write_file_atomic(config.output_dir / "report.json", format_report_json(report));
    return report;
}

std::string format_report_text(const ComparisonReport& report) {
    std::ostringstream out;
    out << "classes: " << report.catalog.to_string() << '\n';
    out << "seed: " << report.seed << "\n\n";

    out << "Unclassified and mixed pixels\n";
    out << std::left << std::setw(14) << "kernel" << std::setw(16) << "type" << std::right << std::setw(10) << "1A1"
        << std::setw(10) << "1AA" << '\n';
    for (const auto& row : report.rows) {
        out << std::left << std::setw(14) << row.kernel.label() << std::setw(16) << "unclassified" << std::right
            << std::setw(10) << row.one_against_one.special.unclassified << std::setw(10)
            << row.one_against_all.special.unclassified << '\n';
        out << std::left << std::setw(14) << "" << std::setw(16) << "mixed" << std::right << std::setw(10)
            << row.one_against_one.special.mixed << std::setw(10) << row.one_against_all.special.mixed << '\n';
    }

    out << "\nKappa comparison\n";
    out << std::left << std::setw(14) << "kernel" << std::right << std::setw(10) << "cost" << std::setw(10) << "1A1"
        << std::setw(10) << "1AA" << std::setw(10) << "Z" << "  significance\n";
    out << std::fixed;
    for (const auto& row : report.rows) {
        const bool equal = row.one_against_one.accuracy.kappa == row.one_against_all.accuracy.kappa;
        out << std::left << std::setw(14) << row.kernel.label() << std::right << std::setprecision(4)
            << std::setw(10) << row.cost << std::setw(10) << row.one_against_one.accuracy.kappa << std::setw(10)
            << row.one_against_all.accuracy.kappa << std::setprecision(2) << std::setw(10) << row.verdict.z << "  "
            << (row.verdict.significant ? "difference significant"
                                        : equal ? "no difference" : "difference insignificant")
            << '\n';
    }

    for (const auto& row : report.rows) {
        for (const auto* o : {&row.one_against_one, &row.one_against_all}) {
            out << '\n' << row.kernel.label() << ", " << to_string(o->strategy) << '\n';
            out << format_accuracy_text(o->confusion, o->accuracy);
        }
    }
    return out.str();
}

std::string format_report_json(const ComparisonReport& report) {
    Json root;
    Json classes = Json::array();
    for (const auto& e : report.catalog.entries()) classes.push_back({{"code", e.code}, {"name", e.name}});
    root["classes"] = std::move(classes);
    root["seed"] = report.seed;
    Json rows = Json::array();
    for (const auto& row : report.rows) {
        Json j;
        j["kernel"] = row.kernel.label();
        j["kind"] = std::string(to_string(row.kernel.kind));
        j["degree"] = row.kernel.effective_degree();
        j["offset"] = row.kernel.offset;
        j["gamma"] = row.kernel.gamma ? Json(*row.kernel.gamma) : Json(nullptr);
        j["cost"] = row.cost;
        Json cv = Json::array();
        for (const auto& s : row.cv_table) {
            cv.push_back({{"cost", s.cost},
                          {"fold_accuracies", s.fold_accuracies},
                          {"mean_accuracy", s.mean_accuracy},
                          {"failed", s.failed}});
        }
        j["cross_validation"] = std::move(cv);
        j["one_against_one"] = outcome_json(row.one_against_one);
        j["one_against_all"] = outcome_json(row.one_against_all);
        j["z"] = row.verdict.z;
        j["significant"] = row.verdict.significant;
        rows.push_back(std::move(j));
    }
    root["kernels"] = std::move(rows);
    return root.dump(2) + "\n";
}

}  // namespace multisvm
