#include <doctest.h>

#include <set>

#include "multisvm/assessment.hpp"
#include "multisvm/error.hpp"
#include "multisvm/file_util.hpp"
#include "multisvm/synthetic.hpp"
#include "temp_dir.hpp"

using namespace multisvm;

namespace {

double linear_1a1_kappa(const SyntheticScene& scene) {
    const LabeledDataset train = extract_samples(scene.image, scene.train);
    const MulticlassModel model =
        train_multiclass(train, scene.catalog, Strategy::OneAgainstOne, KernelSpec::linear(), 1.0);
    const LabelMap map = classify_raster(model, scene.image);
    return kappa(build_confusion(map, scene.test, scene.catalog)).kappa;
}

}  // namespace

TEST_CASE("same seed gives byte-identical scenes") {
    SyntheticConfig cfg;
    cfg.rows = 40;
    cfg.cols = 30;
    TempDir dir;
    const SyntheticScene a = generate_synthetic(cfg);
    const SyntheticScene b = generate_synthetic(cfg);
    write_raster(dir / "a.hdr", a.image);
    write_raster(dir / "b.hdr", b.image);
    CHECK(read_file(dir / "a.bin") == read_file(dir / "b.bin"));
    CHECK(a.truth == b.truth);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);

    cfg.seed = 43;
    CHECK_FALSE(generate_synthetic(cfg).image == a.image);
}

TEST_CASE("train and test samples are disjoint, balanced and truthful") {
    SyntheticConfig cfg;
    cfg.rows = 50;
    cfg.cols = 50;
    const SyntheticScene s = generate_synthetic(cfg);
    CHECK(s.catalog.size() == 3);
    CHECK(s.train.size() == 3 * cfg.train_per_class);
    CHECK(s.test.size() == 3 * cfg.test_per_class);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto* set : {&s.train, &s.test}) {
        for (const auto& p : *set) {
            CHECK(seen.insert({p.row, p.col}).second);
            CHECK(s.truth.at(p.row, p.col) == p.label);
        }
    }
}

TEST_CASE("no overlap keeps the stripe layout") {
    SyntheticConfig cfg;
    cfg.rows = 20;
    cfg.cols = 30;
    cfg.overlap_fraction = 0.0;
    cfg.train_per_class = 10;
    cfg.test_per_class = 10;
    const SyntheticScene s = generate_synthetic(cfg);
    for (std::size_t r = 0; r < cfg.rows; ++r) {
        for (std::size_t c = 0; c < cfg.cols; ++c) CHECK(s.truth.at(r, c) == s.catalog[c / 10].code);
    }
}

TEST_CASE("well separated scene is classified perfectly") {
    SyntheticConfig cfg;
    cfg.rows = 40;
    cfg.cols = 60;
    cfg.separation = 10.0;
    cfg.overlap_fraction = 0.0;
    cfg.train_per_class = 30;
    cfg.test_per_class = 100;
    CHECK(linear_1a1_kappa(generate_synthetic(cfg)) == 1.0);
}

TEST_CASE("zero separation gives chance-level agreement") {
    SyntheticConfig cfg;
    cfg.rows = 40;
    cfg.cols = 60;
    cfg.separation = 0.0;
    cfg.train_per_class = 30;
    cfg.test_per_class = 100;
    CHECK(linear_1a1_kappa(generate_synthetic(cfg)) < 0.2);
}

TEST_CASE("synthetic parameter errors") {
    const auto bad = [](auto mutate) {
        SyntheticConfig cfg;
        cfg.rows = 30;
        cfg.cols = 30;
        cfg.train_per_class = 5;
        cfg.test_per_class = 5;
        mutate(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(generate_synthetic(bad([](auto& c) { c.classes = 1; })), InputError);
    CHECK_THROWS_AS(generate_synthetic(bad([](auto& c) { c.classes = 13; })), InputError);
    CHECK_THROWS_AS(generate_synthetic(bad([](auto& c) { c.separation = -1.0; })), InputError);
    CHECK_THROWS_AS(generate_synthetic(bad([](auto& c) { c.overlap_fraction = 1.5; })), InputError);
    CHECK_THROWS_AS(generate_synthetic(bad([](auto& c) { c.rows = 0; })), InputError);
    CHECK_THROWS_AS(generate_synthetic(bad([](auto& c) { c.train_per_class = 400; })), InputError);
    CHECK_NOTHROW(generate_synthetic(bad([](auto& c) { c.classes = 12; })));
}
