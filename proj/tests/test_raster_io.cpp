#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "multisvm/error.hpp"
#include "multisvm/file_util.hpp"
#include "multisvm/raster_io.hpp"
#include "temp_dir.hpp"

using namespace multisvm;

namespace {

RasterImage random_image(std::mt19937_64& rng) {
    RasterImage img(1 + rng() % 6, 1 + rng() % 6, 1 + rng() % 4);
    std::normal_distribution<float> value(0.0f, 100.0f);
    for (auto& v : img.data) v = value(rng);
    for (std::size_t b = 0; b < img.bands; ++b) img.band_names.push_back("b" + std::to_string(b + 1));
    if (rng() % 2) {
        img.nodata = -9999.0f;
        img.data[rng() % img.data.size()] = -9999.0f;
    }
    return img;
}

MulticlassModel separable_model() {
    LabeledDataset d;
    for (int i = 0; i < 8; ++i) {
        d.add({0.0 + 0.1 * i, 0.0}, 1);
        d.add({10.0 + 0.1 * i, 0.0}, 2);
        d.add({0.0, 10.0 + 0.1 * i}, 3);
    }
    return train_multiclass(d, ClassCatalog({{1, "a"}, {2, "b"}, {3, "c"}}), Strategy::OneAgainstOne,
                            KernelSpec::linear(), 1.0);
}

}  // namespace

TEST_CASE("single pixel raster") {
    TempDir dir;
    RasterImage img(1, 1, 1);
    write_raster(dir / "one.hdr", img);
    const RasterImage back = read_raster(dir / "one.hdr");
    CHECK(back.rows == 1);
    CHECK(back.cols == 1);
    CHECK(back.bands == 1);
    CHECK(back.data == std::vector<float>{0.0f});
    CHECK(std::filesystem::file_size(dir / "one.bin") == 4);
}

TEST_CASE("header text is fixed") {
    TempDir dir;
    RasterImage img(2, 3, 2);
    img.band_names = {"red", "nir"};
    img.nodata = -1.0f;
    write_raster(dir / "scene.hdr", img);
    CHECK(read_file(dir / "scene.hdr") ==
          "multisvm-raster v1\nrows: 2\ncols: 3\nbands: 2\ndtype: f32\nbyte_order: little-endian\n"
          "interleave: bsq\nnodata: -1\nband_names: red,nir\ndata_file: scene.bin\n\n");
}

TEST_CASE("payload is little-endian band-sequential") {
    TempDir dir;
    RasterImage img(2, 2, 2);
    for (std::size_t k = 0; k < img.data.size(); ++k) img.data[k] = static_cast<float>(k);
    img.at(1, 0, 1) = 1.0f;  // band 1, row 0, col 1 -> element 5
    write_raster(dir / "x.hdr", img);
    const std::string bytes = read_file(dir / "x.bin");
    REQUIRE(bytes.size() == 32);
    // 1.0f = 0x3f800000
    CHECK(static_cast<unsigned char>(bytes[20]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[22]) == 0x80);
    CHECK(static_cast<unsigned char>(bytes[23]) == 0x3f);
    CHECK(read_raster(dir / "x.hdr") == img);
}

TEST_CASE("raster and label map round trips are byte-identical") {
    TempDir dir;
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const RasterImage img = random_image(rng);
        write_raster(dir / "a.hdr", img);
        const RasterImage back = read_raster(dir / "a.hdr");
        CHECK(back == img);
        write_raster(dir / "b.hdr", back);
        CHECK(read_file(dir / "a.bin") == read_file(dir / "b.bin"));

        LabelMap map(img.rows, img.cols);
        for (auto& v : map.labels) v = static_cast<ClassCode>(rng() % 4 == 0 ? kMixed : rng() % 4);
        write_labelmap(dir / "m.hdr", map);
        CHECK(read_labelmap(dir / "m.hdr") == map);
    }
}

TEST_CASE("corrupt raster files") {
    TempDir dir;
    RasterImage img(2, 2, 2);
    write_raster(dir / "x.hdr", img);

    std::string bytes = read_file(dir / "x.bin");
    write_file_atomic(dir / "x.bin", bytes.substr(0, bytes.size() - 1));
    try {
        read_raster(dir / "x.hdr");
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        const std::string what = e.what();
        CHECK(what.find("expected 32 bytes") != std::string::npos);
        CHECK(what.find("found 31") != std::string::npos);
    }

    // NaN without a nodata flag.
    write_file_atomic(dir / "x.bin", bytes);
    img.data[3] = std::nanf("");
    write_raster(dir / "nan.hdr", img);
    try {
        read_raster(dir / "nan.hdr");
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("byte offset 12") != std::string::npos);
    }
    img.nodata = std::nanf("");
    write_raster(dir / "nan.hdr", img);
    const RasterImage flagged = read_raster(dir / "nan.hdr");
    CHECK(flagged.is_nodata(1, 1));  // element 3 is band 0, row 1, col 1

    std::string header = read_file(dir / "x.hdr");
    write_file_atomic(dir / "v2.hdr", "multisvm-raster v2" + header.substr(header.find('\n')));
    CHECK_THROWS_AS(read_raster(dir / "v2.hdr"), FormatError);
    write_file_atomic(dir / "nohdr.hdr", header.substr(0, header.size() - 1));
    CHECK_THROWS_AS(read_raster(dir / "nohdr.hdr"), FormatError);
    CHECK_THROWS_AS(read_raster(dir / "missing.hdr"), IoError);
    CHECK_THROWS_AS(read_labelmap(dir / "x.hdr"), FormatError);
}

TEST_CASE("label map payloads") {
    TempDir dir;
    write_labelmap(dir / "u.hdr", LabelMap(3, 4, kUnclassified));
    CHECK(read_file(dir / "u.bin") == std::string(12, '\0'));

    std::mt19937_64 rng(5);
    LabelMap map(20, 30);
    std::map<ClassCode, int> before;
    for (auto& v : map.labels) {
        v = static_cast<ClassCode>(1 + rng() % 3);
        ++before[v];
    }
    write_labelmap(dir / "h.hdr", map);
    std::map<ClassCode, int> after;
    for (auto v : read_labelmap(dir / "h.hdr").labels) ++after[v];
    CHECK(before == after);
}

TEST_CASE("sample CSV files") {
    TempDir dir;
    const std::vector<PixelSample> pixels{{0, 1, 2}, {3, 4, 1}, {3, 4, 1}};
    write_samples(dir / "p.csv", pixels);
    CHECK(read_file(dir / "p.csv") == "row,col,class\n0,1,2\n3,4,1\n3,4,1\n");
    CHECK(std::get<std::vector<PixelSample>>(read_samples(dir / "p.csv")) == pixels);

    LabeledDataset features;
    features.add({0.5, -1.25}, 1);
    features.add({3.0, 2.0}, 2);
    write_samples(dir / "f.csv", features);
    const auto back = std::get<LabeledDataset>(read_samples(dir / "f.csv"));
    CHECK(back.features == features.features);
    CHECK(back.labels == features.labels);

    write_file_atomic(dir / "bad1.csv", "x,y,class\n1,2,3\n");
    CHECK_THROWS_AS(read_samples(dir / "bad1.csv"), InputError);
    write_file_atomic(dir / "bad2.csv", "row,col,class\n1,2\n");
    CHECK_THROWS_AS(read_samples(dir / "bad2.csv"), InputError);
    write_file_atomic(dir / "bad3.csv", "row,col,class\n1,2,0\n");
    CHECK_THROWS_AS(read_samples(dir / "bad3.csv"), InputError);
    write_file_atomic(dir / "bad4.csv", "f1,class\nabc,1\n");
    CHECK_THROWS_AS(read_samples(dir / "bad4.csv"), InputError);
    write_file_atomic(dir / "empty.csv", "row,col,class\n");
    CHECK(std::get<std::vector<PixelSample>>(read_samples(dir / "empty.csv")).empty());
}

TEST_CASE("extract_samples") {
    RasterImage img(3, 3, 6);
    for (std::size_t b = 0; b < 6; ++b) {
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = 0; c < 3; ++c) img.at(b, r, c) = static_cast<float>(b + 1);
        }
    }
    const std::vector<PixelSample> one{{0, 0, 1}};
    CHECK(extract_samples(img, one).features[0] == FeatureVector{1, 2, 3, 4, 5, 6});

    const std::vector<PixelSample> dup{{1, 1, 1}, {1, 1, 1}};
    CHECK(extract_samples(img, dup).size() == 2);

    const std::vector<PixelSample> outside{{3, 0, 1}};
    try {
        extract_samples(img, outside);
        FAIL("expected an input error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("row 3, col 0") != std::string::npos);
    }

    img.nodata = 0.0f;
    img.at(2, 2, 2) = 0.0f;
    const std::vector<PixelSample> hole{{2, 2, 1}};
    CHECK_THROWS_AS(extract_samples(img, hole), InputError);
}

TEST_CASE("classify_raster") {
    const MulticlassModel model = separable_model();

    RasterImage one(1, 1, 2);
    one.at(0, 0, 0) = 10.3f;
    one.at(1, 0, 0) = 0.0f;
    CHECK(classify_raster(model, one).labels == std::vector<ClassCode>{2});

    RasterImage empty(4, 5, 2);
    empty.nodata = -1.0f;
    std::fill(empty.data.begin(), empty.data.end(), -1.0f);
    CHECK(classify_raster(model, empty) == LabelMap(4, 5, kUnclassified));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<float> coord(-2.0f, 12.0f);
    RasterImage field(37, 23, 2);
    for (auto& v : field.data) v = coord(rng);
    const LabelMap serial = classify_raster(model, field, 1);
    CHECK(classify_raster(model, field, 8) == serial);
    CHECK(classify_raster(model, field, 3) == serial);
    std::size_t total = 0;
    std::map<ClassCode, std::size_t> histogram;
    for (auto v : serial.labels) ++histogram[v];
    for (const auto& [code, count] : histogram) total += count;
    CHECK(total == 37 * 23);

    RasterImage wrong(2, 2, 3);
    CHECK_THROWS_AS(classify_raster(model, wrong), InputError);
}
