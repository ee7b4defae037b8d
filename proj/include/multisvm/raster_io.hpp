#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "multisvm/dataset.hpp"
#include "multisvm/multiclass.hpp"

namespace multisvm {

/**
 * Band-sequential multiband image of 32-bit floats.
 *
 * Sample (band, row, col) lives at data[(band * rows + row) * cols + col].
 */
struct RasterImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t bands = 0;
    std::vector<std::string> band_names;
    std::vector<float> data;
    std::optional<float> nodata;

    RasterImage() = default;
    RasterImage(std::size_t r, std::size_t c, std::size_t b);

    float at(std::size_t band, std::size_t row, std::size_t col) const {
        return data[(band * rows + row) * cols + col];
    }
    float& at(std::size_t band, std::size_t row, std::size_t col) { return data[(band * rows + row) * cols + col]; }

    /// True when any band of the pixel carries the nodata value (NaN matches NaN).
    bool is_nodata(std::size_t row, std::size_t col) const;
    /// Band values of one pixel in band order.
    FeatureVector pixel(std::size_t row, std::size_t col) const;

    friend bool operator==(const RasterImage& a, const RasterImage& b);
};

/// One reference or training pixel.
struct PixelSample {
    std::size_t row = 0;
    std::size_t col = 0;
    ClassCode label = 0;

    friend bool operator==(const PixelSample&, const PixelSample&) = default;
};

/// Sample CSV content: pixel coordinates (`row,col,class`) or direct features (`f1..fk,class`).
using TrainingSamples = std::variant<std::vector<PixelSample>, LabeledDataset>;

/*
 * Header layout (UTF-8, one `key: value` per line, blank line terminates):
 *
 *   multisvm-raster v1
 *   rows: 128
 *   cols: 128
 *   bands: 6
 *   dtype: f32            (u8 for label maps)
 *   byte_order: little-endian
 *   interleave: bsq
 *   nodata: -9999         (optional)
 *   band_names: b1,b2,... (optional)
 *   data_file: scene.bin
 *
 * The payload is raw little-endian scalars, band-sequential, row-major within band.
 */
void write_raster(const std::filesystem::path& header_path, const RasterImage& image);
RasterImage read_raster(const std::filesystem::path& header_path);

void write_labelmap(const std::filesystem::path& header_path, const LabelMap& map);
LabelMap read_labelmap(const std::filesystem::path& header_path);

/// Default companion payload path: header path with extension replaced by `.bin`.
std::filesystem::path payload_path_for(const std::filesystem::path& header_path);

TrainingSamples read_samples(const std::filesystem::path& csv_path);
void write_samples(const std::filesystem::path& csv_path, std::span<const PixelSample> samples);
void write_samples(const std::filesystem::path& csv_path, const LabeledDataset& dataset);

/// Feature vectors of the referenced pixels; duplicates are kept.
LabeledDataset extract_samples(const RasterImage& image, std::span<const PixelSample> samples);

/// Pixel samples pass through extract_samples, direct features are returned as-is.
LabeledDataset to_dataset(const RasterImage& image, const TrainingSamples& samples);

/**
 * Classifies every pixel with the model's strategy. Nodata pixels become
 * UNCLASSIFIED. Rows are split across `workers` threads; the result does
 * not depend on the worker count.
 */
LabelMap classify_raster(const MulticlassModel& model, const RasterImage& image, unsigned workers = 1);

}  // namespace multisvm
