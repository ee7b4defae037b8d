#pragma once

// Test-only references that do not share code with the SMO solver.

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "multisvm/kernels.hpp"
#include "multisvm/svm_binary.hpp"

namespace oracle {

using multisvm::FeatureVector;
using multisvm::KernelKind;
using multisvm::KernelSpec;

/// Textbook kernel formulas, written out independently of the library.
inline double kernel(const KernelSpec& spec, const FeatureVector& x, const FeatureVector& z) {
    double dot = 0.0;
    double dist = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * z[i];
        dist += (x[i] - z[i]) * (x[i] - z[i]);
    }
    switch (spec.kind) {
    case KernelKind::Linear: return dot;
    case KernelKind::Quadratic: return std::pow(dot + spec.offset, 2);
    case KernelKind::Polynomial: return std::pow(dot + spec.offset, spec.degree);
    case KernelKind::Rbf: return std::exp(-spec.gamma.value() * dist);
    }
    return 0.0;
}

struct DualSolution {
    std::vector<double> alphas;
    double objective = -std::numeric_limits<double>::infinity();
    double bias = 0.0;
    bool found = false;
};

/**
 * Exact maximizer of the soft-margin dual by enumerating every assignment of
 * each alpha to {0, C, free} and solving the equality-constrained stationarity
 * system on the free block. The best feasible candidate is the optimum.
 * Intended for n <= 8 (3^8 systems).
 */
inline DualSolution solve_dual(const std::vector<FeatureVector>& xs, const std::vector<int>& ys, double cost,
                               const KernelSpec& spec) {
    const std::size_t n = xs.size();
    Eigen::MatrixXd q(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) q(i, j) = ys[i] * ys[j] * kernel(spec, xs[i], xs[j]);
    }

    DualSolution best;
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= 3;
    const double feas_tol = 1e-10;

    for (std::size_t code = 0; code < combos; ++code) {
        std::vector<int> state(n);  // 0 lower, 1 upper, 2 free
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = static_cast<int>(c % 3);
            c /= 3;
        }
        std::vector<std::size_t> free_idx;
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i] == 1) alpha(static_cast<Eigen::Index>(i)) = cost;
            if (state[i] == 2) free_idx.push_back(i);
        }
        const std::size_t f = free_idx.size();
        if (f == 0) {
            double eq = 0.0;
            for (std::size_t i = 0; i < n; ++i) eq += ys[i] * alpha(static_cast<Eigen::Index>(i));
            if (std::abs(eq) > feas_tol) continue;
        } else {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(f + 1), static_cast<Eigen::Index>(f + 1));
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f + 1));
            double bound_eq = 0.0;
            for (std::size_t i = 0; i < n; ++i) bound_eq += (state[i] == 1 ? ys[i] * cost : 0.0);
            for (std::size_t r = 0; r < f; ++r) {
                const auto ir = free_idx[r];
                for (std::size_t s = 0; s < f; ++s) a(r, s) = q(ir, free_idx[s]);
                a(r, f) = ys[ir];
                a(f, r) = ys[ir];
                double fixed = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (state[j] == 1) fixed += q(ir, j) * cost;
                }
                rhs(r) = 1.0 - fixed;
            }
            rhs(f) = -bound_eq;
            const Eigen::VectorXd sol = a.completeOrthogonalDecomposition().solve(rhs);
            if ((a * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
            bool feasible = true;
            for (std::size_t r = 0; r < f; ++r) {
                const double v = sol(r);
                if (v < -feas_tol || v > cost + feas_tol) feasible = false;
                alpha(free_idx[r]) = std::clamp(v, 0.0, cost);
            }
            if (!feasible) continue;
        }
        const double objective = alpha.sum() - 0.5 * alpha.dot(q * alpha);
        if (objective > best.objective) {
            best.objective = objective;
            best.alphas.assign(alpha.data(), alpha.data() + n);
            best.found = true;
        }
    }

    // Bias from the margin conditions at the optimum.
    double free_sum = 0.0;
    int free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    const double eps = 1e-9;
    for (std::size_t i = 0; i < n; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) g += best.alphas[j] * ys[j] * kernel(spec, xs[j], xs[i]);
        const double needed = ys[i] - g;
        const double a = best.alphas[i];
        if (a > eps && a < cost - eps) {
            free_sum += needed;
            ++free_count;
        } else if ((ys[i] > 0) == (a <= eps)) {
            lower = std::max(lower, needed);
        } else {
            upper = std::min(upper, needed);
        }
    }
    if (free_count > 0) best.bias = free_sum / free_count;
    else if (std::isfinite(lower) && std::isfinite(upper)) best.bias = 0.5 * (lower + upper);
    else best.bias = std::isfinite(lower) ? lower : upper;
    return best;
}

inline double decision(const DualSolution& sol, const std::vector<FeatureVector>& xs, const std::vector<int>& ys,
                       const KernelSpec& spec, const FeatureVector& probe) {
    double f = sol.bias;
    for (std::size_t j = 0; j < xs.size(); ++j) f += sol.alphas[j] * ys[j] * kernel(spec, xs[j], probe);
    return f;
}

/// Outcome of checking a trained solution against box, equality and KKT conditions.
struct KktReport {
    bool box = true;
    bool equality = true;
    bool kkt = true;
    double worst_kkt = 0.0;
    double equality_residual = 0.0;
};

inline KktReport check_kkt(const multisvm::BinaryProblem& problem, const multisvm::TrainResult& result,
                           double tolerance) {
    KktReport r;
    double eq = 0.0;
    for (std::size_t i = 0; i < problem.samples.size(); ++i) {
        const double a = result.alphas[i];
        const int y = problem.labels[i];
        if (a < 0.0 || a > problem.cost) r.box = false;
        eq += a * y;
        const double margin = y * multisvm::decision_value(result.model, problem.samples[i]);
        double violation = 0.0;
        if (a == 0.0) violation = std::max(0.0, 1.0 - margin);
        else if (a == problem.cost) violation = std::max(0.0, margin - 1.0);
        else violation = std::abs(margin - 1.0);
        r.worst_kkt = std::max(r.worst_kkt, violation);
    }
    r.equality_residual = std::abs(eq);
    r.equality = r.equality_residual <= 1e-8;
    r.kkt = r.worst_kkt <= tolerance;
    for (double c : result.model.dual_coefs) {
        if (std::abs(c) > problem.cost) r.box = false;
    }
    return r;
}

/// Random binary problem with both labels present.
inline multisvm::BinaryProblem random_problem(std::mt19937_64& rng, std::size_t n, std::size_t dims, double cost) {
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    multisvm::BinaryProblem p;
    p.cost = cost;
    for (std::size_t i = 0; i < n; ++i) {
        FeatureVector x(dims);
        for (auto& v : x) v = coord(rng);
        p.samples.push_back(std::move(x));
        p.labels.push_back((rng() & 1u) ? 1 : -1);
    }
    p.labels[0] = 1;
    p.labels[1] = -1;
    return p;
}

}  // namespace oracle
