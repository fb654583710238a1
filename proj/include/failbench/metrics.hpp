#pragma once

#include <optional>
#include <vector>

#include "failbench/balance.hpp"

namespace failbench {

// Counts (reals when class-weighted) with "failure" as the positive class.
struct ConfusionMatrix {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    double tn = 0.0;

    double total() const { return tp + fp + fn + tn; }
};

struct MetricsReport {
    double precision_f = 0.0;
    double recall_f = 0.0;
    double f1_f = 0.0;
    double precision_n = 0.0;
    double recall_n = 0.0;
    double f1_n = 0.0;
    double macro_f1 = 0.0;

    double macro_precision() const { return 0.5 * (precision_f + precision_n); }
    double macro_recall() const { return 0.5 * (recall_f + recall_n); }
};

// When weighted, each sample contributes its true-class weight.
ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          const std::optional<ClassWeights>& weights = std::nullopt);

// Precision/recall/F1 with each class as positive, macro F1 as their mean.
// Any 0/0 term is defined as 0.
MetricsReport report(const ConfusionMatrix& cm);

}  // namespace failbench
