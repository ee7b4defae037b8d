// Command line front end: synth, train, classify, assess, compare.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "multisvm/assessment.hpp"
#include "multisvm/error.hpp"
#include "multisvm/experiment.hpp"
#include "multisvm/file_util.hpp"
#include "multisvm/model_io.hpp"
#include "multisvm/raster_io.hpp"
#include "multisvm/synthetic.hpp"

namespace fs = std::filesystem;
using namespace multisvm;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitConvergence = 2;

double parse_double(const std::string& text, const std::string& what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw InputError("bad " + what + " '" + text + "'");
    return v;
}

// linear | quadratic[:offset] | polynomial[:degree[:offset]] | rbf[:gamma]
KernelSpec parse_kernel_token(const std::string& token) {
    std::vector<std::string> parts;
    std::stringstream ss(token);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.empty()) throw InputError("empty kernel specification");
    KernelSpec spec;
    switch (parse_kernel_kind(parts[0])) {
    case KernelKind::Linear:
        spec = KernelSpec::linear();
        break;
    case KernelKind::Quadratic:
        spec = KernelSpec::quadratic(parts.size() > 1 ? parse_double(parts[1], "offset") : 1.0);
        break;
    case KernelKind::Polynomial:
        spec = KernelSpec::polynomial(parts.size() > 1 ? static_cast<int>(parse_double(parts[1], "degree")) : 3,
                                      parts.size() > 2 ? parse_double(parts[2], "offset") : 1.0);
        break;
    case KernelKind::Rbf:
        spec = KernelSpec::rbf(parts.size() > 1 ? std::optional<double>(parse_double(parts[1], "gamma"))
                                                : std::nullopt);
        break;
    }
    spec.validate();
    return spec;
}

// Inline "1:water,2:vegetation" or a file holding that text.
std::optional<ClassCatalog> parse_catalog_option(const std::string& value) {
    if (value.empty()) return std::nullopt;
    if (fs::is_regular_file(value)) return ClassCatalog::parse(read_file(value));
    return ClassCatalog::parse(value);
}

ClassCatalog catalog_or_codes(const std::optional<ClassCatalog>& catalog, const std::vector<ClassCode>& codes) {
    return catalog ? *catalog : ClassCatalog::from_codes(codes);
}

struct TrainFlags {
    double tolerance = 1e-3;
    int max_passes = 100;

    void add_to(CLI::App* app) {
        app->add_option("--tolerance", tolerance, "KKT tolerance of the SMO solver")->capture_default_str();
        app->add_option("--max-passes", max_passes, "iteration budget in multiples of the sample count")
            ->capture_default_str();
    }
    TrainOptions options() const {
        TrainOptions o;
        o.tolerance = tolerance;
        o.max_passes = max_passes;
        return o;
    }
};

int run_synth(const SyntheticConfig& config, const fs::path& out_dir) {
    const SyntheticScene scene = generate_synthetic(config);
    fs::create_directories(out_dir);
    write_raster(out_dir / "scene.hdr", scene.image);
    write_labelmap(out_dir / "truth.hdr", scene.truth);
    write_samples(out_dir / "train.csv", scene.train);
    write_samples(out_dir / "test.csv", scene.test);
    write_file_atomic(out_dir / "catalog.txt", scene.catalog.to_string() + "\n");
    std::cout << "wrote " << config.rows << "x" << config.cols << "x" << config.bands << " scene, "
              << scene.train.size() << " training and " << scene.test.size() << " test samples to "
              << out_dir.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiclass SVM land-cover classification and one-against-one / one-against-all comparison"};
    app.require_subcommand(1);

    // synth
    SyntheticConfig synth;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic multiband scene with train/test samples");
    synth_cmd->add_option("--out-dir", synth_out, "output directory")->required();
    synth_cmd->add_option("--rows", synth.rows)->capture_default_str();
    synth_cmd->add_option("--cols", synth.cols)->capture_default_str();
    synth_cmd->add_option("--classes", synth.classes)->capture_default_str();
    synth_cmd->add_option("--bands", synth.bands)->capture_default_str();
    synth_cmd->add_option("--separation", synth.separation, "distance between class means")->capture_default_str();
    synth_cmd->add_option("--overlap", synth.overlap_fraction, "fraction of spatially interleaved pixels")
        ->capture_default_str();
    synth_cmd->add_option("--train-per-class", synth.train_per_class)->capture_default_str();
    synth_cmd->add_option("--test-per-class", synth.test_per_class)->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();

    // train
    std::string train_raster, train_samples, train_model, train_strategy = "1a1", train_kernel = "rbf";
    std::string train_voting = "majority", train_catalog;
    std::vector<double> train_costs{1.0};
    int train_folds = 5;
    std::uint64_t train_seed = 42;
    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "train a multiclass model");
    train_cmd->add_option("--raster", train_raster, "raster header (needed for row,col samples)");
    train_cmd->add_option("--samples", train_samples, "training sample CSV")->required();
    train_cmd->add_option("--model", train_model, "output model file")->required();
    train_cmd->add_option("--strategy", train_strategy, "1a1 or 1aa")->capture_default_str();
    train_cmd->add_option("--kernel", train_kernel, "linear | quadratic[:offset] | polynomial[:degree[:offset]] | rbf[:gamma]")
        ->capture_default_str();
    train_cmd->add_option("--cost", train_costs, "cost value; several values trigger cross-validation")
        ->delimiter(',')
        ->capture_default_str();
    train_cmd->add_option("--folds", train_folds)->capture_default_str();
    train_cmd->add_option("--voting", train_voting, "majority or weighted (1a1 only)")->capture_default_str();
    train_cmd->add_option("--catalog", train_catalog, "class catalog '1:water,2:vegetation' or a file");
    train_cmd->add_option("--seed", train_seed)->capture_default_str();
    train_flags.add_to(train_cmd);

    // classify
    std::string classify_model, classify_raster_path, classify_out, classify_diag;
    unsigned classify_workers = 1;
    auto* classify_cmd = app.add_subcommand("classify", "classify a raster into a label map");
    classify_cmd->add_option("--model", classify_model)->required();
    classify_cmd->add_option("--raster", classify_raster_path)->required();
    classify_cmd->add_option("--out", classify_out, "output label map header")->required();
    classify_cmd->add_option("--workers", classify_workers)->capture_default_str();
    classify_cmd->add_option("--diagnostics", classify_diag, "CSV listing the claiming classes of MIXED pixels");

    // assess
    std::string assess_labels, assess_reference, assess_catalog, assess_compare, assess_json;
    auto* assess_cmd = app.add_subcommand("assess", "confusion matrix and kappa for a label map");
    assess_cmd->add_option("--labels", assess_labels, "label map header")->required();
    assess_cmd->add_option("--reference", assess_reference, "reference CSV (row,col,class)")->required();
    assess_cmd->add_option("--catalog", assess_catalog);
    assess_cmd->add_option("--compare", assess_compare, "second label map; adds the kappa Z-test");
    assess_cmd->add_option("--json", assess_json, "write a machine-readable report");

    // compare
    ExperimentConfig experiment;
    std::string compare_raster, compare_train, compare_test, compare_out, compare_catalog, compare_voting = "majority";
    std::vector<std::string> compare_kernels{"linear", "quadratic", "polynomial:3", "rbf"};
    TrainFlags compare_flags;
    auto* compare_cmd = app.add_subcommand("compare", "full one-against-one vs one-against-all comparison");
    compare_cmd->add_option("--raster", compare_raster)->required();
    compare_cmd->add_option("--train", compare_train)->required();
    compare_cmd->add_option("--test", compare_test)->required();
    compare_cmd->add_option("--out-dir", compare_out)->required();
    compare_cmd->add_option("--catalog", compare_catalog);
    compare_cmd->add_option("--kernels", compare_kernels)->delimiter(',')->capture_default_str();
    compare_cmd->add_option("--costs", experiment.cost_grid)->delimiter(',')->capture_default_str();
    compare_cmd->add_option("--folds", experiment.folds)->capture_default_str();
    compare_cmd->add_option("--voting", compare_voting)->capture_default_str();
    compare_cmd->add_option("--seed", experiment.seed)->capture_default_str();
    compare_cmd->add_option("--workers", experiment.workers)->capture_default_str();
    compare_flags.add_to(compare_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*synth_cmd) return run_synth(synth, synth_out);

        if (*train_cmd) {
            const TrainingSamples samples = read_samples(train_samples);
            LabeledDataset dataset;
            if (std::holds_alternative<LabeledDataset>(samples)) {
                dataset = std::get<LabeledDataset>(samples);
            } else {
                if (train_raster.empty()) throw InputError("row,col samples need --raster");
                dataset = to_dataset(read_raster(train_raster), samples);
            }
            const ClassCatalog catalog = catalog_or_codes(parse_catalog_option(train_catalog), dataset.labels);
            const Strategy strategy = parse_strategy(train_strategy);
            const Voting voting = parse_voting(train_voting);
            const KernelSpec kernel = parse_kernel_token(train_kernel);
            double cost = train_costs.front();
            if (train_costs.size() > 1) {
                const std::vector<Strategy> strategies{strategy};
                const std::vector<KernelSpec> grid{kernel};
                const auto cv = cross_validate_multiclass(dataset, catalog, strategies, grid, train_costs, train_folds,
                                                          train_seed, voting, train_flags.options());
                cost = cv.cost;
                for (const auto& row : cv.table) {
                    std::cout << "cv cost " << row.cost << ": mean accuracy " << row.mean_accuracy
                              << (row.failed ? " (did not converge)" : "") << '\n';
                }
            }
            const MulticlassModel model =
                train_multiclass(dataset, catalog, strategy, kernel, cost, voting, train_flags.options());
            save_model(train_model, model);
            std::cout << "trained " << model.machines.size() << " machines (" << to_string(strategy) << ", "
                      << kernel.label() << ", cost " << cost << ") -> " << train_model << '\n';
            return 0;
        }

        if (*classify_cmd) {
            const MulticlassModel model = load_model(classify_model);
            const RasterImage image = read_raster(classify_raster_path);
            const LabelMap map = classify_raster(model, image, classify_workers);
            write_labelmap(classify_out, map);
            if (!classify_diag.empty()) {
                std::ostringstream diag;
                diag << "row,col,classes\n";
                for (std::size_t r = 0; r < map.rows; ++r) {
                    for (std::size_t c = 0; c < map.cols; ++c) {
                        if (map.at(r, c) != kMixed) continue;
                        const Prediction p = predict_1aa(model, image.pixel(r, c));
                        diag << r << ',' << c << ',';
                        for (std::size_t k = 0; k < p.positive_classes.size(); ++k) {
                            diag << (k ? ";" : "") << static_cast<int>(p.positive_classes[k]);
                        }
                        diag << '\n';
                    }
                }
                write_file_atomic(classify_diag, diag.str());
            }
            const SpecialCounts counts = count_special(map);
            std::cout << "classified " << map.rows * map.cols << " pixels: " << counts.unclassified
                      << " unclassified, " << counts.mixed << " mixed\n";
            return 0;
        }

        if (*assess_cmd) {
            const TrainingSamples samples = read_samples(assess_reference);
            const auto* reference = std::get_if<std::vector<PixelSample>>(&samples);
            if (!reference) throw InputError("reference samples must be given as row,col,class");
            std::vector<ClassCode> codes;
            for (const auto& s : *reference) codes.push_back(s.label);
            const ClassCatalog catalog = catalog_or_codes(parse_catalog_option(assess_catalog), codes);

            const LabelMap first = read_labelmap(assess_labels);
            const ConfusionMatrix m1 = build_confusion(first, *reference, catalog);
            const AccuracyReport r1 = kappa(m1);
            std::cout << format_accuracy_text(m1, r1);
            nlohmann::ordered_json json;
            const auto report_json = [](const ConfusionMatrix& m, const AccuracyReport& r) {
                nlohmann::ordered_json j;
                nlohmann::ordered_json rows = nlohmann::ordered_json::array();
                for (std::size_t i = 0; i < m.row_count(); ++i) {
                    nlohmann::ordered_json row = nlohmann::ordered_json::array();
                    for (std::size_t c = 0; c < m.classes(); ++c) row.push_back(m(i, c));
                    rows.push_back(row);
                }
                j["confusion_matrix"] = rows;
                j["overall_accuracy"] = r.overall_accuracy;
                j["chance_agreement"] = r.chance_agreement;
                j["kappa"] = r.kappa;
                j["kappa_variance"] = r.kappa_variance;
                return j;
            };
            json["first"] = report_json(m1, r1);
            if (!assess_compare.empty()) {
                const LabelMap second = read_labelmap(assess_compare);
                const ConfusionMatrix m2 = build_confusion(second, *reference, catalog);
                const AccuracyReport r2 = kappa(m2);
                const ComparisonVerdict v = z_test(r1, r2);
                std::cout << '\n' << format_accuracy_text(m2, r2);
                std::cout << "\nZ = " << v.z << " -> difference " << (v.significant ? "significant" : "insignificant")
                          << " at the 95% level\n";
                json["second"] = report_json(m2, r2);
                json["z"] = v.z;
                json["significant"] = v.significant;
            }
            if (!assess_json.empty()) write_file_atomic(assess_json, json.dump(2) + "\n");
            return 0;
        }

        if (*compare_cmd) {
            experiment.raster = compare_raster;
            experiment.train_samples = compare_train;
            experiment.test_samples = compare_test;
            experiment.output_dir = compare_out;
            experiment.catalog = parse_catalog_option(compare_catalog);
            experiment.voting = parse_voting(compare_voting);
            experiment.train_options = compare_flags.options();
            experiment.kernels.clear();
            for (const auto& token : compare_kernels) experiment.kernels.push_back(parse_kernel_token(token));
            const ComparisonReport report = run_experiment(experiment);
            std::cout << format_report_text(report);
            return 0;
        }
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << " (iterations " << e.diagnostics().iterations
                  << ", gap " << e.diagnostics().violation_gap << ")\n";
        return kExitConvergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
