#pragma once

#include <cstdint>
#include <vector>

#include "multisvm/multiclass.hpp"
#include "multisvm/raster_io.hpp"

namespace multisvm {

struct SyntheticConfig {
    std::size_t rows = 128;
    std::size_t cols = 128;
    std::size_t classes = 3;
    std::size_t bands = 6;
    double separation = 2.0;        // distance between class mean signatures
    double overlap_fraction = 0.3;  // share of pixels whose class differs from their region's
    std::size_t train_per_class = 60;
    std::size_t test_per_class = 100;
    std::uint64_t seed = 42;
};

struct SyntheticScene {
    RasterImage image;
    LabelMap truth;
    ClassCatalog catalog;
    std::vector<PixelSample> train;
    std::vector<PixelSample> test;
};

/**
 * Scene of vertical class stripes with Gaussian band signatures.
 *
 * Class k sits at +-separation/sqrt(2) along band axis k mod bands (sign
 * flips after the first `bands` classes), so any two means are at least
 * `separation` apart, on top of a common reflectance offset and unit noise.
 * A fraction `overlap_fraction` of pixels is reassigned to a random other
 * class. Train and test samples are disjoint and balanced per class.
 */
SyntheticScene generate_synthetic(const SyntheticConfig& config);

}  // namespace multisvm
