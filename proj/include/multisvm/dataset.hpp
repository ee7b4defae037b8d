#pragma once

#include <cstdint>
#include <vector>

#include "multisvm/kernels.hpp"

namespace multisvm {

/// Class code as stored in label maps: 1..254 for classes, 0 and 255 are sentinels.
using ClassCode = std::uint8_t;

inline constexpr ClassCode kUnclassified = 0;
inline constexpr ClassCode kMixed = 255;

/// Feature vectors paired with class codes.
struct LabeledDataset {
    std::vector<FeatureVector> features;
    std::vector<ClassCode> labels;

    std::size_t size() const noexcept { return features.size(); }
    bool empty() const noexcept { return features.empty(); }
    std::size_t dimensions() const noexcept { return features.empty() ? 0 : features.front().size(); }

    void add(FeatureVector x, ClassCode label) {
        features.push_back(std::move(x));
        labels.push_back(label);
    }

    /// Throws InputError on length mismatch, ragged rows or non-finite entries.
    void validate() const;
};

/// Per-pixel classification result, row-major.
struct LabelMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<ClassCode> labels;

    LabelMap() = default;
    LabelMap(std::size_t r, std::size_t c, ClassCode fill = kUnclassified) : rows(r), cols(c), labels(r * c, fill) {}

    ClassCode at(std::size_t row, std::size_t col) const { return labels[row * cols + col]; }
    ClassCode& at(std::size_t row, std::size_t col) { return labels[row * cols + col]; }

    friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

}  // namespace multisvm
