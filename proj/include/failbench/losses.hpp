#pragma once

#include <optional>
#include <vector>

#include "failbench/balance.hpp"

namespace failbench {

enum class LossKind { bce, sigmoid_f1 };

struct LossConfig {
    LossKind kind = LossKind::bce;
    double beta = 1.0;  // sigmoid slope, > 0
    double eta = 0.0;   // sigmoid offset
};

struct LossValueGrad {
    double value = 0.0;
    std::vector<double> grad;  // d loss / d logit, per sample
};

// Smoothed-F1 surrogate: S(u) = 1/(1+exp(-beta*(u+eta))); soft confusion
// counts tp/fp/fn from S; loss = 1 - 2tp/(2tp+fp+fn). A batch with zero
// denominator scores loss 1.
double sigmoid_f1_loss(const std::vector<double>& logits, const std::vector<int>& labels,
                       double beta, double eta);
LossValueGrad sigmoid_f1_loss_grad(const std::vector<double>& logits, const std::vector<int>& labels,
                                   double beta, double eta);

// Mean of w_y * [-y log sigma(u) - (1-y) log(1-sigma(u))], in the stabilized
// log-sum-exp form.
double bce_loss(const std::vector<double>& logits, const std::vector<int>& labels,
                const std::optional<ClassWeights>& weights = std::nullopt);
LossValueGrad bce_loss_grad(const std::vector<double>& logits, const std::vector<int>& labels,
                            const std::optional<ClassWeights>& weights = std::nullopt);

double loss_value(const LossConfig& cfg, const std::vector<double>& logits,
                  const std::vector<int>& labels);
LossValueGrad loss_value_grad(const LossConfig& cfg, const std::vector<double>& logits,
                              const std::vector<int>& labels);

}  // namespace failbench
