#include <cmath>

#include "failbench/errors.hpp"
#include "failbench/models.hpp"
#include "failbench/rng.hpp"

namespace failbench {

namespace {

void check_two_classes(const std::vector<int>& y) {
    bool pos = false, neg = false;
    for (int v : y) (v != 0 ? pos : neg) = true;
    if (!pos || !neg) throw SingleClassInput("training requires both classes");
}

double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

struct Objective {
    const Matrix& x;
    const std::vector<int>& y;
    double l2;  // 1 / (C * M), weights only

    // Mean BCE plus (l2/2)*||w||^2; intercept unregularized.
    double value(const std::vector<double>& w, double b) const {
        const auto m = static_cast<double>(x.rows);
        double sum = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            double u = b;
            const double* xi = x.row(i);
            for (std::size_t d = 0; d < x.cols; ++d) u += w[d] * xi[d];
            const double yy = y[i] != 0 ? 1.0 : 0.0;
            sum += std::max(u, 0.0) - u * yy + std::log1p(std::exp(-std::abs(u)));
        }
        double penalty = 0.0;
        for (double wd : w) penalty += wd * wd;
        return sum / m + 0.5 * l2 * penalty;
    }

    void gradient(const std::vector<double>& w, double b, std::vector<double>& gw,
                  double& gb) const {
        const auto m = static_cast<double>(x.rows);
        gw.assign(x.cols, 0.0);
        gb = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            double u = b;
            const double* xi = x.row(i);
            for (std::size_t d = 0; d < x.cols; ++d) u += w[d] * xi[d];
            const double r = sigmoid(u) - (y[i] != 0 ? 1.0 : 0.0);
            for (std::size_t d = 0; d < x.cols; ++d) gw[d] += r * xi[d];
            gb += r;
        }
        for (std::size_t d = 0; d < x.cols; ++d) gw[d] = gw[d] / m + l2 * w[d];
        gb /= m;
    }
};

}  // namespace

LogregModel train_logreg(const Matrix& x, const std::vector<int>& y, double C, std::uint64_t seed) {
    if (x.rows != y.size()) throw LengthMismatch("feature/label count mismatch");
    if (x.rows < 2) throw SingleClassInput("training requires at least two samples");
    check_two_classes(y);
    if (C <= 0.0) throw InvalidConfig("logistic regression C must be positive");

    const Objective obj{x, y, 1.0 / (C * static_cast<double>(x.rows))};

    Rng rng(mix_seed(seed, "logreg-init"));
    std::vector<double> w(x.cols);
    for (auto& wd : w) wd = rng.uniform(-0.01, 0.01);
    double b = rng.uniform(-0.01, 0.01);

    constexpr int kMaxIter = 5000;
    constexpr double kGradTol = 1e-6;
    constexpr double kArmijo = 1e-4;

    std::vector<double> gw, w_try(x.cols);
    double gb = 0.0;
    double step = 1.0;
    double f = obj.value(w, b);

    for (int iter = 0; iter < kMaxIter; ++iter) {
        obj.gradient(w, b, gw, gb);
        double g2 = gb * gb;
        for (double g : gw) g2 += g * g;
        if (std::sqrt(g2) <= kGradTol) break;

        // Backtracking line search; the accepted step seeds the next
        // iteration (doubled) so the search stays cheap.
        step *= 2.0;
        double f_try = 0.0, b_try = 0.0;
        for (;;) {
            for (std::size_t d = 0; d < x.cols; ++d) w_try[d] = w[d] - step * gw[d];
            b_try = b - step * gb;
            f_try = obj.value(w_try, b_try);
            if (f_try <= f - kArmijo * step * g2 || step < 1e-18) break;
            step *= 0.5;
        }
        if (step < 1e-18) break;  // no descent direction left at double precision
        w.swap(w_try);
        b = b_try;
        f = f_try;
    }
    return {std::move(w), b};
}

std::vector<Prediction> predict_logreg(const LogregModel& model, const Matrix& x) {
    if (x.cols != model.weights.size()) throw ShapeMismatch("feature width differs from training");
    std::vector<Prediction> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        double u = model.intercept;
        const double* xi = x.row(i);
        for (std::size_t d = 0; d < x.cols; ++d) u += model.weights[d] * xi[d];
        const double p = sigmoid(u);
        out[i] = {p, p >= 0.5 ? 1 : 0};
    }
    return out;
}

}  // namespace failbench
