#include "multisvm/raster_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "multisvm/error.hpp"
#include "multisvm/file_util.hpp"
#include "multisvm/model_io.hpp"

namespace multisvm {

namespace {

constexpr std::string_view kMagic = "multisvm-raster v1";

struct Header {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t bands = 0;
    std::string dtype;
    std::optional<float> nodata;
    std::vector<std::string> band_names;
    std::filesystem::path data_file;
};

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r");
    return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

template <typename T>
bool parse_exact(std::string_view text, T& value) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc() && ptr == text.data() + text.size();
}

float parse_float_token(std::string_view text) {
    if (text == "nan" || text == "NaN") return std::numeric_limits<float>::quiet_NaN();
    float value = 0.0f;
    if (!parse_exact(text, value)) throw FormatError("cannot parse nodata value '" + std::string(text) + "'");
    return value;
}

std::string format_float(float value) {
    if (std::isnan(value)) return "nan";
    char buffer[32];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

std::string header_text(std::size_t rows, std::size_t cols, std::size_t bands, std::string_view dtype,
                        const std::optional<float>& nodata, std::span<const std::string> band_names,
                        const std::filesystem::path& data_file) {
    std::ostringstream out;
    out << kMagic << '\n';
    out << "rows: " << rows << '\n';
    out << "cols: " << cols << '\n';
    out << "bands: " << bands << '\n';
    out << "dtype: " << dtype << '\n';
    out << "byte_order: little-endian\n";
    out << "interleave: bsq\n";
    if (nodata) out << "nodata: " << format_float(*nodata) << '\n';
    if (!band_names.empty()) {
        out << "band_names: ";
        for (std::size_t b = 0; b < band_names.size(); ++b) out << (b ? "," : "") << band_names[b];
        out << '\n';
    }
    out << "data_file: " << data_file.filename().string() << '\n';
    out << '\n';
    return out.str();
}

Header parse_header(const std::filesystem::path& header_path) {
    const std::string text = read_file(header_path);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    const auto fail = [&](const std::string& what) -> void {
        throw FormatError(header_path.string() + " line " + std::to_string(line_no) + ": " + what);
    };

    if (!std::getline(in, line)) fail("empty header");
    ++line_no;
    line = trim(line);
    if (line != kMagic) {
        if (line.rfind("multisvm-raster", 0) == 0) fail("unsupported raster version '" + line + "'");
        fail("not a multisvm raster header");
    }

    std::map<std::string, std::string> fields;
    bool terminated = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            terminated = true;
            break;
        }
        const auto colon = line.find(':');
        if (colon == std::string::npos) fail("expected 'key: value' but found '" + line + "'");
        const std::string key = trim(std::string_view(line).substr(0, colon));
        if (!fields.emplace(key, trim(std::string_view(line).substr(colon + 1))).second) {
            fail("duplicate key '" + key + "'");
        }
    }
    if (!terminated) fail("header is not terminated by a blank line");

    const auto require = [&](const std::string& key) -> const std::string& {
        const auto it = fields.find(key);
        if (it == fields.end()) throw FormatError(header_path.string() + ": missing required key '" + key + "'");
        return it->second;
    };
    const auto positive = [&](const std::string& key) {
        std::size_t value = 0;
        if (!parse_exact(std::string_view(require(key)), value) || value == 0) {
            throw FormatError(header_path.string() + ": '" + key + "' must be a positive integer");
        }
        return value;
    };

    Header h;
    h.rows = positive("rows");
    h.cols = positive("cols");
    h.bands = positive("bands");
    h.dtype = require("dtype");
    if (h.dtype != "f32" && h.dtype != "u8") throw FormatError(header_path.string() + ": unknown dtype '" + h.dtype + "'");
    if (require("byte_order") != "little-endian") {
        throw FormatError(header_path.string() + ": unsupported byte order '" + fields["byte_order"] + "'");
    }
    if (require("interleave") != "bsq") {
        throw FormatError(header_path.string() + ": unsupported interleave '" + fields["interleave"] + "'");
    }
    if (const auto it = fields.find("nodata"); it != fields.end()) h.nodata = parse_float_token(it->second);
    if (const auto it = fields.find("band_names"); it != fields.end()) {
        h.band_names = split(it->second, ',');
        if (h.band_names.size() != h.bands) {
            throw FormatError(header_path.string() + ": " + std::to_string(h.band_names.size()) +
                              " band names for " + std::to_string(h.bands) + " bands");
        }
    }
    if (const auto it = fields.find("data_file"); it != fields.end()) {
        h.data_file = header_path.parent_path() / it->second;
    } else {
        h.data_file = payload_path_for(header_path);
    }
    return h;
}

std::string read_payload(const Header& h, std::size_t scalar_size) {
    const std::string bytes = read_file(h.data_file);
    const std::size_t expected = h.rows * h.cols * h.bands * scalar_size;
    if (bytes.size() != expected) {
        throw FormatError(h.data_file.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                          std::to_string(bytes.size()));
    }
    return bytes;
}

std::uint32_t load_le32(const char* p) {
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(p[k]);
    return v;
}

void store_le32(char* p, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) p[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
}

bool same_bits_or_nan(float a, float b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

RasterImage::RasterImage(std::size_t r, std::size_t c, std::size_t b)
    : rows(r), cols(c), bands(b), data(r * c * b, 0.0f) {}

bool RasterImage::is_nodata(std::size_t row, std::size_t col) const {
    if (!nodata) return false;
    for (std::size_t b = 0; b < bands; ++b) {
        if (same_bits_or_nan(at(b, row, col), *nodata)) return true;
    }
    return false;
}

FeatureVector RasterImage::pixel(std::size_t row, std::size_t col) const {
    FeatureVector v(bands);
    for (std::size_t b = 0; b < bands; ++b) v[b] = at(b, row, col);
    return v;
}

bool operator==(const RasterImage& a, const RasterImage& b) {
    if (a.rows != b.rows || a.cols != b.cols || a.bands != b.bands || a.band_names != b.band_names) return false;
    if (a.nodata.has_value() != b.nodata.has_value()) return false;
    if (a.nodata && !same_bits_or_nan(*a.nodata, *b.nodata)) return false;
    return a.data.size() == b.data.size() &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

std::filesystem::path payload_path_for(const std::filesystem::path& header_path) {
    std::filesystem::path p = header_path;
    p.replace_extension(".bin");
    if (p == header_path) p += ".bin";
    return p;
}

void write_raster(const std::filesystem::path& header_path, const RasterImage& image) {
    if (image.rows == 0 || image.cols == 0 || image.bands == 0) throw InputError("raster dimensions must be positive");
    if (image.data.size() != image.rows * image.cols * image.bands) {
        throw InputError("raster data holds " + std::to_string(image.data.size()) + " values, expected " +
                         std::to_string(image.rows * image.cols * image.bands));
    }
    if (!image.band_names.empty() && image.band_names.size() != image.bands) {
        throw InputError("band name count does not match band count");
    }
    const auto payload = payload_path_for(header_path);
    std::string bytes(image.data.size() * 4, '\0');
    for (std::size_t k = 0; k < image.data.size(); ++k) {
        store_le32(bytes.data() + 4 * k, std::bit_cast<std::uint32_t>(image.data[k]));
    }
    write_file_atomic(payload, bytes);
    write_file_atomic(header_path, header_text(image.rows, image.cols, image.bands, "f32", image.nodata,
                                               image.band_names, payload));
}

RasterImage read_raster(const std::filesystem::path& header_path) {
    const Header h = parse_header(header_path);
    if (h.dtype != "f32") throw FormatError(header_path.string() + ": expected dtype f32, found " + h.dtype);
    const std::string bytes = read_payload(h, 4);
    RasterImage image(h.rows, h.cols, h.bands);
    image.band_names = h.band_names;
    image.nodata = h.nodata;
    for (std::size_t k = 0; k < image.data.size(); ++k) {
        const float v = std::bit_cast<float>(load_le32(bytes.data() + 4 * k));
        if (!std::isfinite(v) && !(h.nodata && same_bits_or_nan(v, *h.nodata))) {
            throw FormatError(h.data_file.string() + ": non-finite value at byte offset " + std::to_string(4 * k) +
                              " and no matching nodata flag");
        }
        image.data[k] = v;
    }
    return image;
}

void write_labelmap(const std::filesystem::path& header_path, const LabelMap& map) {
    if (map.rows == 0 || map.cols == 0) throw InputError("label map dimensions must be positive");
    if (map.labels.size() != map.rows * map.cols) throw InputError("label map size does not match its dimensions");
    const auto payload = payload_path_for(header_path);
    write_file_atomic(payload, std::string_view(reinterpret_cast<const char*>(map.labels.data()), map.labels.size()));
    const std::vector<std::string> names{"label"};
    write_file_atomic(header_path, header_text(map.rows, map.cols, 1, "u8", std::nullopt, names, payload));
}

LabelMap read_labelmap(const std::filesystem::path& header_path) {
    const Header h = parse_header(header_path);
    if (h.dtype != "u8" || h.bands != 1) {
        throw FormatError(header_path.string() + ": a label map needs dtype u8 and exactly one band");
    }
    const std::string bytes = read_payload(h, 1);
    LabelMap map(h.rows, h.cols);
    std::memcpy(map.labels.data(), bytes.data(), bytes.size());
    return map;
}

TrainingSamples read_samples(const std::filesystem::path& csv_path) {
    const std::string text = read_file(csv_path);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    const auto fail = [&](const std::string& what) {
        throw InputError(csv_path.string() + " line " + std::to_string(line_no) + ": " + what);
    };

    if (!std::getline(in, line)) throw InputError(csv_path.string() + ": empty sample file");
    ++line_no;
    const auto header = split(trim(line), ',');
    if (header.size() < 2 || header.back() != "class") fail("header must end with 'class'");
    const bool by_pixel = header.size() == 3 && header[0] == "row" && header[1] == "col";
    if (!by_pixel) {
        for (std::size_t k = 0; k + 1 < header.size(); ++k) {
            if (header[k] != "f" + std::to_string(k + 1)) fail("expected 'row,col,class' or 'f1,...,fk,class'");
        }
    }

    std::vector<PixelSample> pixels;
    LabeledDataset features;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(trim(line), ',');
        if (fields.size() != header.size()) {
            fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        int code = -1;
        if (!parse_exact(std::string_view(fields.back()), code) || code < 1 || code > 254) {
            fail("class code '" + fields.back() + "' must be an integer in 1..254");
        }
        if (by_pixel) {
            PixelSample s;
            if (!parse_exact(std::string_view(fields[0]), s.row) || !parse_exact(std::string_view(fields[1]), s.col)) {
                fail("row and col must be non-negative integers");
            }
            s.label = static_cast<ClassCode>(code);
            pixels.push_back(s);
        } else {
            FeatureVector x(fields.size() - 1);
            for (std::size_t k = 0; k < x.size(); ++k) {
                if (!parse_exact(std::string_view(fields[k]), x[k]) || !std::isfinite(x[k])) {
                    fail("feature '" + fields[k] + "' is not a finite number");
                }
            }
            features.add(std::move(x), static_cast<ClassCode>(code));
        }
    }
    if (by_pixel) return pixels;
    return features;
}

void write_samples(const std::filesystem::path& csv_path, std::span<const PixelSample> samples) {
    std::ostringstream out;
    out << "row,col,class\n";
    for (const auto& s : samples) out << s.row << ',' << s.col << ',' << static_cast<int>(s.label) << '\n';
    write_file_atomic(csv_path, out.str());
}

void write_samples(const std::filesystem::path& csv_path, const LabeledDataset& dataset) {
    dataset.validate();
    if (dataset.empty()) throw InputError("cannot write an empty feature dataset");
    std::ostringstream out;
    for (std::size_t k = 0; k < dataset.dimensions(); ++k) out << 'f' << (k + 1) << ',';
    out << "class\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (double v : dataset.features[i]) out << format_real(v) << ',';
        out << static_cast<int>(dataset.labels[i]) << '\n';
    }
    write_file_atomic(csv_path, out.str());
}

LabeledDataset extract_samples(const RasterImage& image, std::span<const PixelSample> samples) {
    LabeledDataset dataset;
    for (const auto& s : samples) {
        if (s.row >= image.rows || s.col >= image.cols) {
            throw InputError("sample at row " + std::to_string(s.row) + ", col " + std::to_string(s.col) +
                             " is outside the " + std::to_string(image.rows) + "x" + std::to_string(image.cols) +
                             " raster");
        }
        if (image.is_nodata(s.row, s.col)) {
            throw InputError("sample at row " + std::to_string(s.row) + ", col " + std::to_string(s.col) +
                             " references a nodata pixel");
        }
        dataset.add(image.pixel(s.row, s.col), s.label);
    }
    return dataset;
}

LabeledDataset to_dataset(const RasterImage& image, const TrainingSamples& samples) {
    if (const auto* pixels = std::get_if<std::vector<PixelSample>>(&samples)) return extract_samples(image, *pixels);
    return std::get<LabeledDataset>(samples);
}

LabelMap classify_raster(const MulticlassModel& model, const RasterImage& image, unsigned workers) {
    model.validate();
    if (image.bands != model.dimensions()) {
        throw InputError("raster has " + std::to_string(image.bands) + " bands, model expects " +
                         std::to_string(model.dimensions()));
    }
    LabelMap map(image.rows, image.cols, kUnclassified);
    const auto classify_rows = [&](std::size_t first, std::size_t last) {
        for (std::size_t r = first; r < last; ++r) {
            for (std::size_t c = 0; c < image.cols; ++c) {
                if (!image.is_nodata(r, c)) map.at(r, c) = predict(model, image.pixel(r, c));
            }
        }
    };

    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(image.rows)));
    if (workers == 1) {
        classify_rows(0, image.rows);
        return map;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (image.rows + workers - 1) / workers;
    for (std::size_t first = 0, w = 0; first < image.rows; first += chunk, ++w) {
        threads.emplace_back([&, first, w] {
            try {
                classify_rows(first, std::min(image.rows, first + chunk));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return map;
}

}  // namespace multisvm
