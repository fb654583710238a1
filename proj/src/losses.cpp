#include "failbench/losses.hpp"

#include <cmath>

#include "failbench/errors.hpp"

namespace failbench {

namespace {

double stable_sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

void check_batch(const std::vector<double>& logits, const std::vector<int>& labels) {
    if (logits.size() != labels.size()) throw LengthMismatch("logit/label length mismatch");
    if (logits.empty()) throw LengthMismatch("loss needs a non-empty batch");
}

}  // namespace

LossValueGrad sigmoid_f1_loss_grad(const std::vector<double>& logits, const std::vector<int>& labels,
                                   double beta, double eta) {
    check_batch(logits, labels);
    if (beta <= 0.0) throw InvalidConfig("sigmoid-F1 beta must be positive");

    const std::size_t n = logits.size();
    std::vector<double> s(n);
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = stable_sigmoid(beta * (logits[i] + eta));
        if (labels[i] != 0) {
            tp += s[i];
            fn += 1.0 - s[i];
        } else {
            fp += s[i];
        }
    }

    LossValueGrad out;
    out.grad.assign(n, 0.0);
    const double den = 2.0 * tp + fp + fn;
    if (den <= 0.0) {
        out.value = 1.0;  // no positives and confident negatives
        return out;
    }
    out.value = 1.0 - 2.0 * tp / den;
    // d(den)/dS_i = 1 for every sample, so
    // d loss / dS_i = (2 tp - 2 y_i den) / den^2.
    for (std::size_t i = 0; i < n; ++i) {
        const double y = labels[i] != 0 ? 1.0 : 0.0;
        const double dloss_ds = (2.0 * tp - 2.0 * y * den) / (den * den);
        out.grad[i] = dloss_ds * beta * s[i] * (1.0 - s[i]);
    }
    return out;
}

double sigmoid_f1_loss(const std::vector<double>& logits, const std::vector<int>& labels,
                       double beta, double eta) {
    return sigmoid_f1_loss_grad(logits, labels, beta, eta).value;
}

LossValueGrad bce_loss_grad(const std::vector<double>& logits, const std::vector<int>& labels,
                            const std::optional<ClassWeights>& weights) {
    check_batch(logits, labels);
    const std::size_t n = logits.size();

    LossValueGrad out;
    out.grad.assign(n, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = logits[i];
        const double y = labels[i] != 0 ? 1.0 : 0.0;
        const double w = weights ? (labels[i] != 0 ? weights->w_failure : weights->w_no_failure) : 1.0;
        // -y log s - (1-y) log(1-s) = max(u,0) - u y + log(1 + exp(-|u|))
        sum += w * (std::max(u, 0.0) - u * y + std::log1p(std::exp(-std::abs(u))));
        out.grad[i] = w * (stable_sigmoid(u) - y) / static_cast<double>(n);
    }
    out.value = sum / static_cast<double>(n);
    return out;
}

double bce_loss(const std::vector<double>& logits, const std::vector<int>& labels,
                const std::optional<ClassWeights>& weights) {
    return bce_loss_grad(logits, labels, weights).value;
}

double loss_value(const LossConfig& cfg, const std::vector<double>& logits,
                  const std::vector<int>& labels) {
    return loss_value_grad(cfg, logits, labels).value;
}

LossValueGrad loss_value_grad(const LossConfig& cfg, const std::vector<double>& logits,
                              const std::vector<int>& labels) {
    if (cfg.kind == LossKind::sigmoid_f1) {
        return sigmoid_f1_loss_grad(logits, labels, cfg.beta, cfg.eta);
    }
    return bce_loss_grad(logits, labels);
}

}  // namespace failbench
