#include "multisvm/assessment.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "multisvm/error.hpp"

namespace multisvm {

ConfusionMatrix::ConfusionMatrix(ClassCatalog catalog)
    : catalog_(std::move(catalog)), counts_((catalog_.size() + 2) * catalog_.size(), 0) {}

void ConfusionMatrix::add(ClassCode predicted, ClassCode reference) {
    const std::size_t col = catalog_.index_of(reference);
    std::size_t row = 0;
    if (predicted == kUnclassified) {
        row = unclassified_row();
    } else if (predicted == kMixed) {
        row = mixed_row();
    } else if (catalog_.contains(predicted)) {
        row = catalog_.index_of(predicted);
    } else {
        throw InputError("predicted label " + std::to_string(predicted) + " is neither a sentinel nor a catalog class");
    }
    ++(*this)(row, col);
}

std::uint64_t ConfusionMatrix::total() const noexcept {
    std::uint64_t sum = 0;
    for (auto c : counts_) sum += c;
    return sum;
}

std::uint64_t ConfusionMatrix::row_total(std::size_t row) const {
    std::uint64_t sum = 0;
    for (std::size_t c = 0; c < classes(); ++c) sum += (*this)(row, c);
    return sum;
}

std::uint64_t ConfusionMatrix::col_total(std::size_t col) const {
    std::uint64_t sum = 0;
    for (std::size_t r = 0; r < row_count(); ++r) sum += (*this)(r, col);
    return sum;
}

ConfusionMatrix ConfusionMatrix::from_rows(ClassCatalog catalog, const std::vector<std::vector<std::uint64_t>>& rows) {
    ConfusionMatrix m(std::move(catalog));
    if (rows.size() != m.classes() && rows.size() != m.row_count()) {
        throw InputError("confusion matrix needs " + std::to_string(m.classes()) + " or " +
                         std::to_string(m.row_count()) + " rows");
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.classes()) throw InputError("confusion matrix row has the wrong width");
        for (std::size_t c = 0; c < m.classes(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

ConfusionMatrix build_confusion(const LabelMap& predicted, std::span<const PixelSample> reference,
                                const ClassCatalog& catalog) {
    if (reference.empty()) throw InputError("reference sample set is empty");
    ConfusionMatrix matrix(catalog);
    for (const auto& s : reference) {
        if (s.row >= predicted.rows || s.col >= predicted.cols) {
            throw InputError("reference pixel at row " + std::to_string(s.row) + ", col " + std::to_string(s.col) +
                             " is outside the label map");
        }
        if (!catalog.contains(s.label)) {
            throw InputError("reference class " + std::to_string(s.label) + " is not in the catalog");
        }
        matrix.add(predicted.at(s.row, s.col), s.label);
    }
    return matrix;
}

AccuracyReport kappa(const ConfusionMatrix& matrix) {
    const std::uint64_t n = matrix.total();
    if (n == 0) throw InputError("confusion matrix is empty");
    const double total = static_cast<double>(n);
    const std::size_t k = matrix.classes();

    std::uint64_t diagonal = 0;
    std::uint64_t chance_numerator = 0;  // exact while row_i * col_i sums fit in 64 bits
    for (std::size_t i = 0; i < k; ++i) {
        diagonal += matrix(i, i);
        chance_numerator += matrix.row_total(i) * matrix.col_total(i);
    }

    AccuracyReport r;
    r.n = n;
    r.overall_accuracy = static_cast<double>(diagonal) / total;
    r.chance_agreement = static_cast<double>(chance_numerator) / (total * total);
    if (chance_numerator == n * n) {
        throw DegenerateError("chance agreement is 1; kappa is undefined for this matrix");
    }
    const double one_minus_pe = 1.0 - r.chance_agreement;
    r.kappa = (r.overall_accuracy - r.chance_agreement) / one_minus_pe;
    r.kappa_variance = r.overall_accuracy * (1.0 - r.overall_accuracy) / (total * one_minus_pe * one_minus_pe);

    for (std::size_t i = 0; i < k; ++i) {
        const auto col = matrix.col_total(i);
        const auto row = matrix.row_total(i);
        r.producer_accuracy.push_back(col ? std::optional<double>(static_cast<double>(matrix(i, i)) / col)
                                          : std::nullopt);
        r.user_accuracy.push_back(row ? std::optional<double>(static_cast<double>(matrix(i, i)) / row)
                                      : std::nullopt);
    }
    return r;
}

ComparisonVerdict z_test(const AccuracyReport& a, const AccuracyReport& b) {
    if (!std::isfinite(a.kappa_variance) || !std::isfinite(b.kappa_variance) || a.kappa_variance < 0.0 ||
        b.kappa_variance < 0.0) {
        throw InputError("kappa variances must be finite and non-negative");
    }
    const double difference = a.kappa - b.kappa;
    const double pooled = a.kappa_variance + b.kappa_variance;
    ComparisonVerdict v;
    if (pooled == 0.0) {
        if (difference != 0.0) {
            throw DegenerateError("both kappa variances are zero but the kappas differ; z is unbounded");
        }
        return v;
    }
    v.z = difference / std::sqrt(pooled);
    v.significant = is_significant(v.z);
    return v;
}

std::string format_accuracy_text(const ConfusionMatrix& matrix, const AccuracyReport& report) {
    std::ostringstream out;
    const auto& catalog = matrix.catalog();
    out << "confusion matrix (rows = predicted, columns = reference)\n";
    out << std::setw(16) << "";
    for (const auto& e : catalog.entries()) out << std::setw(14) << e.name;
    out << std::setw(10) << "total" << '\n';
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        const std::string name = r < catalog.size()        ? catalog[r].name
                                 : r == matrix.unclassified_row() ? "UNCLASSIFIED"
                                                                  : "MIXED";
        out << std::setw(16) << name;
        for (std::size_t c = 0; c < matrix.classes(); ++c) out << std::setw(14) << matrix(r, c);
        out << std::setw(10) << matrix.row_total(r) << '\n';
    }
    out << std::setw(16) << "total";
    for (std::size_t c = 0; c < matrix.classes(); ++c) out << std::setw(14) << matrix.col_total(c);
    out << std::setw(10) << matrix.total() << '\n';
    out << std::fixed << std::setprecision(4);
    out << "overall accuracy: " << report.overall_accuracy << '\n';
    out << "chance agreement: " << report.chance_agreement << '\n';
    out << "kappa: " << report.kappa << '\n';
    out << std::scientific << std::setprecision(4);
    out << "kappa variance: " << report.kappa_variance << '\n';
    return out.str();
}

}  // namespace multisvm
