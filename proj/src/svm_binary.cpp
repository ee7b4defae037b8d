#include "multisvm/svm_binary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "multisvm/error.hpp"

namespace multisvm {

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kMaxCachedSamples = 3000;

void check_dimensions(std::span<const FeatureVector> samples) {
    if (samples.empty()) throw InputError("no samples");
    const std::size_t dims = samples.front().size();
    if (dims == 0) throw InputError("samples have no features");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != dims) {
            throw InputError("sample " + std::to_string(i) + " has " + std::to_string(samples[i].size()) +
                             " features, expected " + std::to_string(dims));
        }
        for (double v : samples[i]) {
            if (!std::isfinite(v)) throw InputError("sample " + std::to_string(i) + " has a non-finite feature");
        }
    }
}

// Rows of Q_ij = y_i y_j K(x_i, x_j). Small problems keep the whole matrix;
// larger ones recompute the two rows an SMO step needs.
class QMatrix {
public:
    QMatrix(const KernelSpec& kernel, std::span<const FeatureVector> xs, std::span<const int> ys)
        : kernel_(kernel), xs_(xs), ys_(ys), n_(xs.size()), diagonal_(n_) {
        for (std::size_t i = 0; i < n_; ++i) diagonal_[i] = evaluate(kernel_, xs_[i], xs_[i]);
        if (n_ <= kMaxCachedSamples) {
            full_ = gram_matrix(kernel_, xs_);
        } else {
            slots_[0].assign(n_, 0.0);
            slots_[1].assign(n_, 0.0);
        }
    }

    double kernel_diagonal(std::size_t i) const noexcept { return diagonal_[i]; }

    double kernel(std::size_t i, std::size_t j) const {
        return full_.size() ? full_(i, j) : evaluate(kernel_, xs_[i], xs_[j]);
    }

    // Signed row i: y_i y_t K_it. `slot` selects which scratch buffer backs the result.
    std::span<const double> row(std::size_t i, int slot) {
        auto& out = slots_[slot];
        out.resize(n_);
        if (full_.size()) {
            const auto k = full_.row(i);
            for (std::size_t t = 0; t < n_; ++t) out[t] = ys_[i] * ys_[t] * k[t];
        } else {
            for (std::size_t t = 0; t < n_; ++t) out[t] = ys_[i] * ys_[t] * evaluate(kernel_, xs_[i], xs_[t]);
        }
        return out;
    }

private:
    const KernelSpec& kernel_;
    std::span<const FeatureVector> xs_;
    std::span<const int> ys_;
    std::size_t n_;
    std::vector<double> diagonal_;
    GramMatrix full_;
    std::vector<double> slots_[2];
};

bool in_up(int y, double alpha, double cost) { return (y > 0 && alpha < cost) || (y < 0 && alpha > 0.0); }
bool in_low(int y, double alpha, double cost) { return (y < 0 && alpha < cost) || (y > 0 && alpha > 0.0); }

struct WorkingSet {
    std::ptrdiff_t i = -1;
    std::ptrdiff_t j = -1;
    double gap = 0.0;
};

// Maximal violating i, then j by second-order gain.
WorkingSet select_working_set(const std::vector<double>& alpha, const std::vector<double>& grad,
                              std::span<const int> ys, double cost, QMatrix& q) {
    const std::size_t n = alpha.size();
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
        if (in_up(ys[t], alpha[t], cost)) {
            const double v = -ys[t] * grad[t];
            if (v > gmax) {
                gmax = v;
                i = static_cast<std::ptrdiff_t>(t);
            }
        }
    }
    double gmin = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    double best_gain = std::numeric_limits<double>::infinity();
    if (i >= 0) {
        const double kii = q.kernel_diagonal(static_cast<std::size_t>(i));
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(ys[t], alpha[t], cost)) continue;
            const double v = -ys[t] * grad[t];
            gmin = std::min(gmin, v);
            const double b = gmax - v;
            if (b > 0.0) {
                double a = kii + q.kernel_diagonal(t) - 2.0 * q.kernel(static_cast<std::size_t>(i), t);
                if (a <= 0.0) a = kTau;
                const double gain = -(b * b) / a;
                if (gain < best_gain) {
                    best_gain = gain;
                    j = static_cast<std::ptrdiff_t>(t);
                }
            }
        }
    }
    WorkingSet ws;
    ws.i = i;
    ws.j = j;
    ws.gap = (i >= 0 && std::isfinite(gmin)) ? gmax - gmin : 0.0;
    return ws;
}

double objective_from_gradient(const std::vector<double>& alpha, const std::vector<double>& grad) {
    // grad = Q alpha - 1, so 1/2 a'Qa - 1'a = 1/2 a'(grad - 1).
    double primal_form = 0.0;
    for (std::size_t t = 0; t < alpha.size(); ++t) primal_form += alpha[t] * (grad[t] - 1.0);
    return -0.5 * primal_form;
}

}  // namespace

void BinaryProblem::validate() const {
    if (samples.size() != labels.size()) {
        throw InputError("binary problem has " + std::to_string(samples.size()) + " samples but " +
                         std::to_string(labels.size()) + " labels");
    }
    check_dimensions(samples);
    bool has_positive = false;
    bool has_negative = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            has_positive = true;
        } else if (labels[i] == -1) {
            has_negative = true;
        } else {
            throw InputError("binary label at index " + std::to_string(i) + " is " + std::to_string(labels[i]) +
                             ", expected -1 or +1");
        }
    }
    if (!has_positive || !has_negative) throw InputError("binary problem needs samples of both classes");
    if (!(cost > 0.0) || !std::isfinite(cost)) throw InputError("cost must be finite and > 0");
}

Standardizer Standardizer::fit(std::span<const FeatureVector> samples) {
    check_dimensions(samples);
    const std::size_t dims = samples.front().size();
    const double n = static_cast<double>(samples.size());
    Standardizer s;
    s.means.assign(dims, 0.0);
    s.stddevs.assign(dims, 0.0);
    for (const auto& x : samples) {
        for (std::size_t d = 0; d < dims; ++d) s.means[d] += x[d];
    }
    for (auto& m : s.means) m /= n;
    for (const auto& x : samples) {
        for (std::size_t d = 0; d < dims; ++d) {
            const double dev = x[d] - s.means[d];
            s.stddevs[d] += dev * dev;
        }
    }
    for (auto& sd : s.stddevs) {
        sd = std::sqrt(sd / n);
        if (!(sd > 0.0)) sd = 1.0;
    }
    return s;
}

Standardizer Standardizer::identity(std::size_t dimensions) {
    Standardizer s;
    s.means.assign(dimensions, 0.0);
    s.stddevs.assign(dimensions, 1.0);
    return s;
}

FeatureVector Standardizer::apply(std::span<const double> x) const {
    if (x.size() != means.size()) {
        throw InputError("feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                         std::to_string(means.size()));
    }
    FeatureVector out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - means[d]) / stddevs[d];
    return out;
}

TrainResult train_detailed(const BinaryProblem& problem, const KernelSpec& kernel, const TrainOptions& options) {
    problem.validate();
    kernel.validate();
    if (!(options.tolerance > 0.0)) throw InputError("tolerance must be > 0");
    if (options.max_passes < 1) throw InputError("max_passes must be >= 1");

    const std::size_t n = problem.samples.size();
    const double cost = problem.cost;
    const std::span<const int> ys(problem.labels);

    TrainResult result;
    auto& model = result.model;
    model.kernel = kernel.resolved(problem.samples.front().size());
    model.cost = cost;
    model.scaling = options.standardize ? Standardizer::fit(problem.samples)
                                        : Standardizer::identity(problem.samples.front().size());
    result.scaled.reserve(n);
    for (const auto& x : problem.samples) result.scaled.push_back(model.scaling.apply(x));

    QMatrix q(model.kernel, result.scaled, ys);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    const std::size_t budget = static_cast<std::size_t>(options.max_passes) * n;
    std::size_t iter = 0;
    for (;;) {
        const WorkingSet ws = select_working_set(alpha, grad, ys, cost, q);
        if (ws.j < 0 || ws.gap <= options.tolerance) break;
        if (iter >= budget) {
            std::ostringstream msg;
            msg << "SMO did not converge within " << budget << " iterations (violation gap " << ws.gap
                << ", tolerance " << options.tolerance << ")";
            throw ConvergenceError(msg.str(), {iter, ws.gap, objective_from_gradient(alpha, grad)});
        }
        ++iter;

        const auto i = static_cast<std::size_t>(ws.i);
        const auto j = static_cast<std::size_t>(ws.j);
        const auto qi = q.row(i, 0);
        const auto qj = q.row(j, 1);
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        double& ai = alpha[i];
        double& aj = alpha[j];

        if (ys[i] != ys[j]) {
            double quad = qi[i] + qj[j] + 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > cost) {
                    ai = cost;
                    aj = cost - diff;
                }
            } else if (aj > cost) {
                aj = cost;
                ai = cost + diff;
            }
        } else {
            double quad = qi[i] + qj[j] - 2.0 * qi[j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > cost) {
                if (ai > cost) {
                    ai = cost;
                    aj = sum - cost;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > cost) {
                if (aj > cost) {
                    aj = cost;
                    ai = sum - cost;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }

        const double dai = ai - old_ai;
        const double daj = aj - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * dai + qj[t] * daj;
    }

    // Bias from the margin condition: free vectors pin it, otherwise take the
    // midpoint of the feasible interval.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        // grad_t = y_t g_t - 1 with g_t the kernel expansion at x_t, so y_t - g_t = -y_t grad_t.
        const double needed = -ys[t] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < cost) {
            free_sum += needed;
            ++free_count;
        } else if ((ys[t] > 0) == (alpha[t] <= 0.0)) {
            lower = std::max(lower, needed);
        } else {
            upper = std::min(upper, needed);
        }
    }
    if (free_count > 0) {
        model.bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(lower) && std::isfinite(upper)) {
        model.bias = 0.5 * (lower + upper);
    } else {
        model.bias = std::isfinite(lower) ? lower : upper;
    }

    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.support_vectors.push_back(result.scaled[t]);
            model.dual_coefs.push_back(alpha[t] * ys[t]);
        }
    }
    result.dual_objective = objective_from_gradient(alpha, grad);
    result.iterations = iter;
    result.alphas = std::move(alpha);
    return result;
}

BinarySvmModel train(const BinaryProblem& problem, const KernelSpec& kernel, const TrainOptions& options) {
    return std::move(train_detailed(problem, kernel, options).model);
}

double decision_value(const BinarySvmModel& model, std::span<const double> x) {
    const FeatureVector scaled = model.scaling.apply(x);
    double sum = model.bias;
    for (std::size_t k = 0; k < model.support_vectors.size(); ++k) {
        sum += model.dual_coefs[k] * evaluate(model.kernel, model.support_vectors[k], scaled);
    }
    return sum;
}

double dual_objective(std::span<const double> alphas, std::span<const int> labels, const GramMatrix& gram) {
    double linear = 0.0;
    double quadratic = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        linear += alphas[i];
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            quadratic += alphas[i] * alphas[j] * labels[i] * labels[j] * gram(i, j);
        }
    }
    return linear - 0.5 * quadratic;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [label, members] : by_class) {
        if (members.size() < static_cast<std::size_t>(folds)) {
            throw InputError("class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                             " samples, fewer than the " + std::to_string(folds) + " folds requested");
        }
    }
    std::mt19937_64 rng(seed);
    std::vector<int> assignment(labels.size(), 0);
    std::size_t next = 0;
    for (auto& [label, members] : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t idx : members) assignment[idx] = static_cast<int>(next++ % static_cast<std::size_t>(folds));
    }
    return assignment;
}

std::size_t select_best(std::span<const FoldScore> table) {
    if (table.empty()) throw InputError("empty cross-validation table");
    std::size_t best = 0;
    for (std::size_t k = 1; k < table.size(); ++k) {
        const auto& cand = table[k];
        const auto& cur = table[best];
        if (cand.mean_accuracy > cur.mean_accuracy ||
            (cand.mean_accuracy == cur.mean_accuracy && cand.cost < cur.cost)) {
            best = k;
        }
    }
    return best;
}

CrossValidationResult cross_validate(const BinaryProblem& dataset, std::span<const KernelSpec> kernel_grid,
                                     std::span<const double> cost_grid, int folds, std::uint64_t seed,
                                     const TrainOptions& options) {
    if (kernel_grid.empty() || cost_grid.empty()) throw InputError("cross-validation grids must be nonempty");
    BinaryProblem probe = dataset;
    probe.cost = 1.0;
    probe.validate();
    const std::vector<int> assignment = stratified_folds(dataset.labels, folds, seed);

    CrossValidationResult result;
    for (std::size_t k = 0; k < kernel_grid.size(); ++k) {
        for (double cost : cost_grid) {
            FoldScore score;
            score.kernel_index = k;
            score.cost = cost;
            for (int f = 0; f < folds; ++f) {
                BinaryProblem train_part;
                train_part.cost = cost;
                std::vector<std::size_t> held_out;
                for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
                    if (assignment[i] == f) {
                        held_out.push_back(i);
                    } else {
                        train_part.samples.push_back(dataset.samples[i]);
                        train_part.labels.push_back(dataset.labels[i]);
                    }
                }
                double accuracy = 0.0;
                try {
                    const BinarySvmModel model = train(train_part, kernel_grid[k], options);
                    std::size_t correct = 0;
                    for (std::size_t i : held_out) {
                        const int predicted = decision_value(model, dataset.samples[i]) >= 0.0 ? 1 : -1;
                        if (predicted == dataset.labels[i]) ++correct;
                    }
                    accuracy = static_cast<double>(correct) / static_cast<double>(held_out.size());
                } catch (const ConvergenceError&) {
                    score.failed = true;
                }
                score.fold_accuracies.push_back(accuracy);
            }
            double total = 0.0;
            for (double a : score.fold_accuracies) total += a;
            score.mean_accuracy = total / static_cast<double>(folds);
            result.table.push_back(std::move(score));
        }
    }
    const std::size_t best = select_best(result.table);
    result.kernel = kernel_grid[result.table[best].kernel_index];
    result.cost = result.table[best].cost;
    return result;
}

}  // namespace multisvm
