#include "multisvm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "multisvm/error.hpp"

namespace multisvm {

namespace {

constexpr double kBaseReflectance = 100.0;

ClassCatalog default_catalog(std::size_t classes) {
    static const char* const kNames[] = {"water", "vegetation", "built_up"};
    std::vector<ClassEntry> entries;
    for (std::size_t k = 0; k < classes; ++k) {
        const auto code = static_cast<ClassCode>(k + 1);
        entries.push_back({code, classes <= 3 ? kNames[k] : "class_" + std::to_string(k + 1)});
    }
    return ClassCatalog(std::move(entries));
}

}  // namespace

SyntheticScene generate_synthetic(const SyntheticConfig& config) {
    if (config.rows == 0 || config.cols == 0) throw InputError("scene dimensions must be positive");
    if (config.bands == 0) throw InputError("scene needs at least one band");
    if (config.classes < 2) throw InputError("scene needs at least 2 classes");
    if (config.classes > 2 * config.bands || config.classes > 254) {
        throw InputError("at most 2 * bands (and 254) classes can be placed, got " + std::to_string(config.classes));
    }
    if (config.classes > config.cols) throw InputError("scene needs at least one column per class");
    if (!(config.separation >= 0.0) || !std::isfinite(config.separation)) {
        throw InputError("class separation must be finite and >= 0");
    }
    if (!(config.overlap_fraction >= 0.0 && config.overlap_fraction <= 1.0)) {
        throw InputError("overlap fraction must lie in [0, 1]");
    }
    if (config.train_per_class == 0 || config.test_per_class == 0) {
        throw InputError("train and test sample counts per class must be positive");
    }

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    SyntheticScene scene;
    scene.catalog = default_catalog(config.classes);
    scene.truth = LabelMap(config.rows, config.cols);
    scene.image = RasterImage(config.rows, config.cols, config.bands);
    for (std::size_t b = 0; b < config.bands; ++b) scene.image.band_names.push_back("band" + std::to_string(b + 1));

    std::vector<std::vector<double>> means(config.classes, std::vector<double>(config.bands, kBaseReflectance));
    const double step = config.separation / std::sqrt(2.0);
    for (std::size_t k = 0; k < config.classes; ++k) {
        means[k][k % config.bands] += k < config.bands ? step : -step;
    }

    std::vector<std::vector<std::size_t>> members(config.classes);
    for (std::size_t r = 0; r < config.rows; ++r) {
        for (std::size_t c = 0; c < config.cols; ++c) {
            std::size_t k = c * config.classes / config.cols;
            if (unit(rng) < config.overlap_fraction) {
                const auto shift = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(config.classes - 1));
                k = (k + std::min(shift, config.classes - 1)) % config.classes;
            }
            scene.truth.at(r, c) = scene.catalog[k].code;
            members[k].push_back(r * config.cols + c);
            for (std::size_t b = 0; b < config.bands; ++b) {
                scene.image.at(b, r, c) = static_cast<float>(means[k][b] + noise(rng));
            }
        }
    }

    const std::size_t wanted = config.train_per_class + config.test_per_class;
    for (std::size_t k = 0; k < config.classes; ++k) {
        auto& pool = members[k];
        if (pool.size() < wanted) {
            throw InputError("class " + scene.catalog[k].name + " covers " + std::to_string(pool.size()) +
                             " pixels, fewer than the " + std::to_string(wanted) + " samples requested");
        }
        std::shuffle(pool.begin(), pool.end(), rng);
        for (std::size_t i = 0; i < wanted; ++i) {
            const PixelSample s{pool[i] / config.cols, pool[i] % config.cols, scene.catalog[k].code};
            (i < config.train_per_class ? scene.train : scene.test).push_back(s);
        }
    }
    return scene;
}

}  // namespace multisvm
