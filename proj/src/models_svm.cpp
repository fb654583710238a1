#include <algorithm>
#include <cmath>
#include <limits>

#include "failbench/errors.hpp"
#include "failbench/models.hpp"
#include "failbench/rng.hpp"

namespace failbench {

namespace {

constexpr double kKktTol = 1e-3;
constexpr double kAlphaEps = 1e-12;
constexpr std::size_t kPassBudget = 20000;

double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

double rbf(const double* a, const double* b, std::size_t dim, double gamma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// Platt's SMO over a precomputed RBF kernel. Decision convention is
// f(x) = sum_i alpha_i y_i K(x_i, x) + b with errors E_i = f(x_i) - y_i.
struct SmoSolver {
    const Matrix& x;
    std::vector<double> y;  // +-1
    double C;
    double gamma;
    Rng rng;

    std::vector<double> kernel;  // M x M
    std::vector<double> alpha;
    std::vector<double> error;
    double b = 0.0;

    explicit SmoSolver(const Matrix& features, const std::vector<int>& labels, double c, double g,
                       std::uint64_t seed)
        : x(features), C(c), gamma(g), rng(mix_seed(seed, "svm-smo")) {
        const std::size_t m = x.rows;
        y.resize(m);
        for (std::size_t i = 0; i < m; ++i) y[i] = labels[i] != 0 ? 1.0 : -1.0;
        kernel.resize(m * m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double k = rbf(x.row(i), x.row(j), x.cols, gamma);
                kernel[i * m + j] = k;
                kernel[j * m + i] = k;
            }
        }
        alpha.assign(m, 0.0);
        error.resize(m);
        for (std::size_t i = 0; i < m; ++i) error[i] = -y[i];  // f = 0 initially
    }

    double k(std::size_t i, std::size_t j) const { return kernel[i * x.rows + j]; }

    bool violates_kkt(std::size_t i) const {
        const double r = error[i] * y[i];
        return (r < -kKktTol && alpha[i] < C) || (r > kKktTol && alpha[i] > 0.0);
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1_old = alpha[i1];
        const double a2_old = alpha[i2];
        const double s = y[i1] * y[i2];

        double lo, hi;
        if (s < 0.0) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(C, C + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a1_old + a2_old - C);
            hi = std::min(C, a1_old + a2_old);
        }
        if (lo >= hi) return false;

        const double eta = k(i1, i1) + k(i2, i2) - 2.0 * k(i1, i2);
        double a2;
        if (eta > 0.0) {
            a2 = a2_old + y[i2] * (error[i1] - error[i2]) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // Degenerate curvature: evaluate the objective at both ends.
            const double f1 = y[i1] * (error[i1] + b) - a1_old * k(i1, i1) - s * a2_old * k(i1, i2);
            const double f2 = y[i2] * (error[i2] + b) - s * a1_old * k(i1, i2) - a2_old * k(i2, i2);
            const double l1 = a1_old + s * (a2_old - lo);
            const double h1 = a1_old + s * (a2_old - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k(i1, i1) +
                                  0.5 * lo * lo * k(i2, i2) + s * lo * l1 * k(i1, i2);
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k(i1, i1) +
                                  0.5 * hi * hi * k(i2, i2) + s * hi * h1 * k(i1, i2);
            if (obj_lo < obj_hi - kAlphaEps) a2 = lo;
            else if (obj_lo > obj_hi + kAlphaEps) a2 = hi;
            else a2 = a2_old;
        }
        if (std::abs(a2 - a2_old) < kAlphaEps * (a2 + a2_old + kAlphaEps)) return false;

        const double a1 = a1_old + s * (a2_old - a2);
        const double da1 = a1 - a1_old;
        const double da2 = a2 - a2_old;

        const double b1 = b - error[i1] - y[i1] * da1 * k(i1, i1) - y[i2] * da2 * k(i1, i2);
        const double b2 = b - error[i2] - y[i1] * da1 * k(i1, i2) - y[i2] * da2 * k(i2, i2);
        double b_new;
        if (a1 > 0.0 && a1 < C) b_new = b1;
        else if (a2 > 0.0 && a2 < C) b_new = b2;
        else b_new = 0.5 * (b1 + b2);
        const double db = b_new - b;

        alpha[i1] = a1;
        alpha[i2] = a2;
        b = b_new;
        for (std::size_t j = 0; j < x.rows; ++j) {
            error[j] += y[i1] * da1 * k(i1, j) + y[i2] * da2 * k(i2, j) + db;
        }
        return true;
    }

    bool examine(std::size_t i2) {
        if (!violates_kkt(i2)) return false;
        const std::size_t m = x.rows;

        // Second-choice heuristic: largest |E1 - E2| among non-bound points.
        std::size_t best = m;
        double best_gap = -1.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (alpha[j] <= 0.0 || alpha[j] >= C) continue;
            const double gap = std::abs(error[i2] - error[j]);
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best < m && take_step(best, i2)) return true;

        const auto offset = static_cast<std::size_t>(rng.uniform_index(m));
        for (std::size_t d = 0; d < m; ++d) {
            const std::size_t j = (offset + d) % m;
            if (alpha[j] > 0.0 && alpha[j] < C && take_step(j, i2)) return true;
        }
        for (std::size_t d = 0; d < m; ++d) {
            const std::size_t j = (offset + d) % m;
            if (take_step(j, i2)) return true;
        }
        return false;
    }

    void solve() {
        std::size_t passes = 0;
        bool examine_all = true;
        std::size_t changed = 1;
        while (changed > 0 || examine_all) {
            if (++passes > kPassBudget) {
                throw ConvergenceFailure("SMO pass budget exhausted with KKT violations remaining");
            }
            changed = 0;
            for (std::size_t i = 0; i < x.rows; ++i) {
                if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= C)) continue;
                changed += examine(i) ? 1 : 0;
            }
            if (examine_all) examine_all = false;
            else if (changed == 0) examine_all = true;
        }
    }
};

}  // namespace

SvmModel train_svm(const Matrix& x, const std::vector<int>& y, double C, double gamma,
                   std::uint64_t seed) {
    if (x.rows != y.size()) throw LengthMismatch("feature/label count mismatch");
    if (x.rows < 2) throw SingleClassInput("training requires at least two samples");
    {
        bool pos = false, neg = false;
        for (int v : y) (v != 0 ? pos : neg) = true;
        if (!pos || !neg) throw SingleClassInput("training requires both classes");
    }
    if (C <= 0.0 || gamma <= 0.0) throw InvalidConfig("SVM C and gamma must be positive");

    SmoSolver solver(x, y, C, gamma, seed);
    solver.solve();

    SvmModel model;
    model.gamma = gamma;
    model.bias = solver.b;
    std::size_t n_sv = 0;
    for (double a : solver.alpha) n_sv += a > kAlphaEps ? 1 : 0;
    model.support_vectors = Matrix(n_sv, x.cols);
    model.coeffs.reserve(n_sv);
    std::size_t row = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        if (solver.alpha[i] <= kAlphaEps) continue;
        std::copy(x.row(i), x.row(i) + x.cols, model.support_vectors.data.begin() +
                                                   static_cast<std::ptrdiff_t>(row * x.cols));
        model.coeffs.push_back(solver.alpha[i] * solver.y[i]);
        ++row;
    }
    return model;
}

double svm_decision(const SvmModel& model, const double* xi, std::size_t dim) {
    if (dim != model.support_vectors.cols) throw ShapeMismatch("feature width differs from training");
    double f = model.bias;
    for (std::size_t s = 0; s < model.support_vectors.rows; ++s) {
        f += model.coeffs[s] * rbf(model.support_vectors.row(s), xi, dim, model.gamma);
    }
    return f;
}

std::vector<Prediction> predict_svm(const SvmModel& model, const Matrix& x) {
    std::vector<Prediction> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double f = svm_decision(model, x.row(i), x.cols);
        out[i] = {sigmoid(f), f >= 0.0 ? 1 : 0};
    }
    return out;
}

}  // namespace failbench
