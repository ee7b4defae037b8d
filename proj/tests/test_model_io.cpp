#include <doctest.h>

#include <random>
#include <sstream>

#include "multisvm/error.hpp"
#include "multisvm/model_io.hpp"

using namespace multisvm;

namespace {

LabeledDataset blobs(std::uint64_t seed, std::size_t dims) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    LabeledDataset d;
    for (ClassCode k = 1; k <= 3; ++k) {
        for (int i = 0; i < 10; ++i) {
            FeatureVector x(dims);
            for (auto& v : x) v = noise(rng) + 3.0 * k;
            x[k % dims] += 4.0;
            d.add(std::move(x), k);
        }
    }
    return d;
}

std::string serialize(const MulticlassModel& m) {
    std::ostringstream out;
    write_model(out, m);
    return out.str();
}

MulticlassModel parse(const std::string& text) {
    std::istringstream in(text);
    return read_model(in);
}

}  // namespace

TEST_CASE("model files restore every number exactly") {
    const ClassCatalog catalog({{1, "water"}, {2, "vegetation"}, {3, "built up"}});
    const std::vector<KernelSpec> kernels{KernelSpec::linear(), KernelSpec::quadratic(0.5),
                                          KernelSpec::polynomial(4, 2.0), KernelSpec::rbf(), KernelSpec::rbf(0.3)};
    std::uint64_t seed = 1;
    for (const auto& kernel : kernels) {
        for (Strategy strategy : {Strategy::OneAgainstOne, Strategy::OneAgainstAll}) {
            const auto d = blobs(seed++, 1 + seed % 5);
            const MulticlassModel model = train_multiclass(d, catalog, strategy, kernel, 2.5, Voting::Weighted);
            const std::string text = serialize(model);
            CHECK(text.rfind("multisvm-model v1\n", 0) == 0);
            const MulticlassModel back = parse(text);
            CHECK(back == model);
            CHECK(serialize(back) == text);
        }
    }
}

TEST_CASE("omitted kernel parameters take their defaults") {
    const std::string text =
        "multisvm-model v1\n"
        "strategy: one-against-all\n"
        "voting: majority\n"
        "classes: 2\n"
        "class: 1 a\n"
        "class: 2 b\n"
        "machines: 2\n"
        "machine: 1 0\n"
        "kernel: polynomial\n"
        "cost: 1\n"
        "means: 0\n"
        "stddevs: 1\n"
        "bias: 0.5\n"
        "support_vectors: 2\n"
        "sv: 1 1\n"
        "sv: -1 -1\n"
        "end\n"
        "machine: 2 0\n"
        "kernel: rbf\n"
        "gamma: 0.25\n"
        "cost: 1\n"
        "means: 0\n"
        "stddevs: 1\n"
        "bias: -0.5\n"
        "support_vectors: 1\n"
        "sv: 0 3\n"
        "end\n";
    const MulticlassModel m = parse(text);
    CHECK(m.machines[0].kernel.degree == 3);
    CHECK(m.machines[0].kernel.offset == 1.0);
    CHECK(m.machines[1].kernel.gamma == 0.25);
}

TEST_CASE("malformed model files") {
    const ClassCatalog catalog({{1, "a"}, {2, "b"}});
    const auto model = train_multiclass(blobs(3, 2), ClassCatalog({{1, "a"}, {2, "b"}, {3, "c"}}),
                                        Strategy::OneAgainstOne, KernelSpec::linear(), 1.0);
    const std::string good = serialize(model);

    CHECK_THROWS_AS(parse("multisvm-model v2\n"), FormatError);
    CHECK_THROWS_AS(parse("hello\n"), FormatError);
    CHECK_THROWS_AS(parse(good.substr(0, good.size() / 2)), FormatError);

    std::string wrong_count = good;
    wrong_count.replace(wrong_count.find("machines: 3"), 11, "machines: 2");
    CHECK_THROWS_AS(parse(wrong_count), FormatError);

    std::string bad_number = good;
    bad_number.replace(bad_number.find("bias: "), 6, "bias: x");
    CHECK_THROWS_AS(parse(bad_number), FormatError);
}
