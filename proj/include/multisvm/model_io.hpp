#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "multisvm/multiclass.hpp"

namespace multisvm {

/**
 * Line-oriented text model format, first line `multisvm-model v1`.
 *
 *   strategy: one-against-one
 *   voting: majority
 *   classes: 3
 *   class: 1 water
 *   ...
 *   machines: 3
 *   machine: 1 2
 *   kernel: rbf
 *   degree: 3
 *   offset: 1
 *   gamma: 0.16666666666666666
 *   cost: 10
 *   means: ...
 *   stddevs: ...
 *   bias: ...
 *   support_vectors: K
 *   sv: <coef> <x1> ... <xd>
 *   end
 *
 * Reals are printed with 17 significant digits so a read restores them exactly.
 */
void write_model(std::ostream& out, const MulticlassModel& model);
MulticlassModel read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const MulticlassModel& model);
MulticlassModel load_model(const std::filesystem::path& path);

std::string format_real(double value);

}  // namespace multisvm
