#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multisvm/multiclass.hpp"
#include "multisvm/raster_io.hpp"

namespace multisvm {

/**
 * Cross-tabulation of predicted category (rows) against reference class (columns).
 *
 * Rows 0..N-1 follow catalog order, row N collects UNCLASSIFIED and row N+1
 * collects MIXED predictions. Columns are the N catalog classes.
 */
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(ClassCatalog catalog);

    const ClassCatalog& catalog() const noexcept { return catalog_; }
    std::size_t classes() const noexcept { return catalog_.size(); }
    std::size_t row_count() const noexcept { return catalog_.size() + 2; }
    std::size_t unclassified_row() const noexcept { return catalog_.size(); }
    std::size_t mixed_row() const noexcept { return catalog_.size() + 1; }

    std::uint64_t operator()(std::size_t row, std::size_t col) const { return counts_[row * classes() + col]; }
    std::uint64_t& operator()(std::size_t row, std::size_t col) { return counts_[row * classes() + col]; }

    /// Adds one observation; `predicted` may be a class code or a sentinel.
    void add(ClassCode predicted, ClassCode reference);

    std::uint64_t total() const noexcept;
    std::uint64_t row_total(std::size_t row) const;
    std::uint64_t col_total(std::size_t col) const;

    /// Builds a matrix from class-row counts; sentinel rows default to zero.
    static ConfusionMatrix from_rows(ClassCatalog catalog, const std::vector<std::vector<std::uint64_t>>& rows);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    ClassCatalog catalog_;
    std::vector<std::uint64_t> counts_;
};

ConfusionMatrix build_confusion(const LabelMap& predicted, std::span<const PixelSample> reference,
                                const ClassCatalog& catalog);

struct AccuracyReport {
    double overall_accuracy = 0.0;
    double chance_agreement = 0.0;
    double kappa = 0.0;
    double kappa_variance = 0.0;
    std::uint64_t n = 0;
    std::vector<std::optional<double>> producer_accuracy;  // per reference class
    std::vector<std::optional<double>> user_accuracy;      // per predicted class row
};

/// Cohen's kappa with the large-sample variance p_o(1 - p_o) / (n (1 - p_e)^2).
AccuracyReport kappa(const ConfusionMatrix& matrix);

struct ComparisonVerdict {
    double z = 0.0;
    bool significant = false;
};

inline constexpr double kCriticalZ = 1.96;

/// Two-sided 95% rule, strict: |z| > 1.96.
constexpr bool is_significant(double z) noexcept { return z > kCriticalZ || z < -kCriticalZ; }

ComparisonVerdict z_test(const AccuracyReport& a, const AccuracyReport& b);

std::string format_accuracy_text(const ConfusionMatrix& matrix, const AccuracyReport& report);

}  // namespace multisvm
