#include "multisvm/kernels.hpp"

#include <cmath>
#include <sstream>

#include "multisvm/error.hpp"

namespace multisvm {

namespace {

void check_operands(std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size()) {
        std::ostringstream msg;
        msg << "kernel operands differ in dimensionality: " << x.size() << " vs " << z.size();
        throw InputError(msg.str());
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(z[i])) {
            throw InputError("kernel operand has a non-finite entry at index " + std::to_string(i));
        }
    }
}

double dot(std::span<const double> x, std::span<const double> z) noexcept {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * z[i];
    return sum;
}

// Symmetric in x and z: (x-z)^2 == (z-x)^2 bitwise.
double squared_distance(std::span<const double> x, std::span<const double> z) noexcept {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - z[i];
        sum += d * d;
    }
    return sum;
}

double integer_power(double base, int exponent) noexcept {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

}  // namespace

KernelSpec KernelSpec::linear() { return KernelSpec{}; }

KernelSpec KernelSpec::quadratic(double offset) {
    KernelSpec spec;
    spec.kind = KernelKind::Quadratic;
    spec.degree = 2;
    spec.offset = offset;
    return spec;
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
    KernelSpec spec;
    spec.kind = KernelKind::Polynomial;
    spec.degree = degree;
    spec.offset = offset;
    return spec;
}

KernelSpec KernelSpec::rbf(std::optional<double> gamma) {
    KernelSpec spec;
    spec.kind = KernelKind::Rbf;
    spec.gamma = gamma;
    return spec;
}

int KernelSpec::effective_degree() const noexcept {
    return kind == KernelKind::Quadratic ? 2 : degree;
}

KernelSpec KernelSpec::resolved(std::size_t dimensions) const {
    KernelSpec copy = *this;
    if (kind == KernelKind::Rbf && !copy.gamma) {
        if (dimensions == 0) throw InputError("cannot resolve rbf gamma for zero-dimensional features");
        copy.gamma = 1.0 / static_cast<double>(dimensions);
    }
    return copy;
}

void KernelSpec::validate() const {
    switch (kind) {
    case KernelKind::Linear:
        break;
    case KernelKind::Quadratic:
    case KernelKind::Polynomial:
        if (kind == KernelKind::Polynomial && degree < 1) {
            throw InputError("polynomial degree must be >= 1, got " + std::to_string(degree));
        }
        if (!(offset >= 0.0) || !std::isfinite(offset)) {
            throw InputError("polynomial offset must be finite and >= 0");
        }
        break;
    case KernelKind::Rbf:
        if (gamma && (!(*gamma > 0.0) || !std::isfinite(*gamma))) {
            throw InputError("rbf gamma must be finite and > 0");
        }
        break;
    }
}

std::string KernelSpec::label() const {
    switch (kind) {
    case KernelKind::Polynomial:
        return "polynomial" + std::to_string(degree);
    default:
        return std::string(to_string(kind));
    }
}

std::string_view to_string(KernelKind kind) noexcept {
    switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Quadratic: return "quadratic";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::Rbf: return "rbf";
    }
    return "unknown";
}

KernelKind parse_kernel_kind(std::string_view text) {
    if (text == "linear") return KernelKind::Linear;
    if (text == "quadratic") return KernelKind::Quadratic;
    if (text == "polynomial") return KernelKind::Polynomial;
    if (text == "rbf") return KernelKind::Rbf;
    throw InputError("unknown kernel '" + std::string(text) + "'");
}

double evaluate(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
    check_operands(x, z);
    switch (spec.kind) {
    case KernelKind::Linear:
        return dot(x, z);
    case KernelKind::Quadratic:
    case KernelKind::Polynomial:
        return integer_power(dot(x, z) + spec.offset, spec.effective_degree());
    case KernelKind::Rbf: {
        if (!spec.gamma) throw InputError("rbf kernel evaluated with unresolved gamma");
        return std::exp(-*spec.gamma * squared_distance(x, z));
    }
    }
    throw InputError("invalid kernel kind");
}

GramMatrix gram_matrix(const KernelSpec& spec, std::span<const FeatureVector> xs) {
    if (xs.empty()) throw InputError("gram matrix of an empty sample list");
    const std::size_t dims = xs.front().size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].size() != dims) {
            throw InputError("sample " + std::to_string(i) + " has " + std::to_string(xs[i].size()) +
                             " features, expected " + std::to_string(dims));
        }
    }
    GramMatrix gram(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i; j < xs.size(); ++j) {
            const double value = evaluate(spec, xs[i], xs[j]);
            gram(i, j) = value;
            gram(j, i) = value;
        }
    }
    return gram;
}

}  // namespace multisvm
