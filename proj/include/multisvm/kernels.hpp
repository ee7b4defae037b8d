#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace multisvm {

using FeatureVector = std::vector<double>;

enum class KernelKind { Linear, Quadratic, Polynomial, Rbf };

/**
 * Kernel selection plus its parameters.
 *
 * Quadratic is evaluated as a polynomial of degree 2. An unset gamma is
 * resolved to 1 / dimensionality when a model is trained.
 */
struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    int degree = 3;
    double offset = 1.0;
    std::optional<double> gamma;

    static KernelSpec linear();
    static KernelSpec quadratic(double offset = 1.0);
    static KernelSpec polynomial(int degree = 3, double offset = 1.0);
    static KernelSpec rbf(std::optional<double> gamma = std::nullopt);

    /// Degree actually used for evaluation (2 for Quadratic).
    int effective_degree() const noexcept;

    /// Copy with gamma filled in for `dimensions` features when it is unset.
    KernelSpec resolved(std::size_t dimensions) const;

    /// Throws InputError when a parameter relevant to `kind` is out of range.
    void validate() const;

    /// Short label such as "rbf" or "polynomial(3)"; used for file names and reports.
    std::string label() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string_view to_string(KernelKind kind) noexcept;
KernelKind parse_kernel_kind(std::string_view text);

/// Kernel value K(x, z). Both vectors must have equal length and finite entries.
double evaluate(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

/// Row-major symmetric matrix of pairwise kernel values.
class GramMatrix {
public:
    GramMatrix() = default;
    explicit GramMatrix(std::size_t size) : size_(size), values_(size * size, 0.0) {}

    std::size_t size() const noexcept { return size_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * size_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * size_ + j]; }
    std::span<const double> row(std::size_t i) const noexcept {
        return std::span<const double>(values_).subspan(i * size_, size_);
    }

private:
    std::size_t size_ = 0;
    std::vector<double> values_;
};

/// Evaluates the upper triangle and mirrors it, so the result is exactly symmetric.
GramMatrix gram_matrix(const KernelSpec& spec, std::span<const FeatureVector> xs);

}  // namespace multisvm
