#include "multisvm/dataset.hpp"

#include <cmath>
#include <string>

#include "multisvm/error.hpp"

namespace multisvm {

void LabeledDataset::validate() const {
    if (features.size() != labels.size()) {
        throw InputError("dataset has " + std::to_string(features.size()) + " feature vectors but " +
                         std::to_string(labels.size()) + " labels");
    }
    const std::size_t dims = dimensions();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != dims) {
            throw InputError("sample " + std::to_string(i) + " has " + std::to_string(features[i].size()) +
                             " features, expected " + std::to_string(dims));
        }
        for (double v : features[i]) {
            if (!std::isfinite(v)) throw InputError("sample " + std::to_string(i) + " has a non-finite feature");
        }
    }
}

}  // namespace multisvm
