#include "failbench/metrics.hpp"

#include "failbench/errors.hpp"

namespace failbench {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_from(double precision, double recall) {
    const double den = precision + recall;
    return den > 0.0 ? 2.0 * precision * recall / den : 0.0;
}

}  // namespace

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          const std::optional<ClassWeights>& weights) {
    if (y_true.size() != y_pred.size()) throw LengthMismatch("prediction/truth length mismatch");
    if (y_true.empty()) throw LengthMismatch("confusion matrix needs at least one sample");

    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool truth = y_true[i] != 0;
        const bool pred = y_pred[i] != 0;
        const double w = weights ? (truth ? weights->w_failure : weights->w_no_failure) : 1.0;
        if (truth && pred) cm.tp += w;
        else if (!truth && pred) cm.fp += w;
        else if (truth && !pred) cm.fn += w;
        else cm.tn += w;
    }
    return cm;
}

MetricsReport report(const ConfusionMatrix& cm) {
    if (cm.total() <= 0.0) throw EmptyMatrix("confusion matrix is empty");

    MetricsReport r;
    r.precision_f = safe_ratio(cm.tp, cm.tp + cm.fp);
    r.recall_f = safe_ratio(cm.tp, cm.tp + cm.fn);
    r.f1_f = f1_from(r.precision_f, r.recall_f);
    // Same formulas with "no failure" as the positive class.
    r.precision_n = safe_ratio(cm.tn, cm.tn + cm.fn);
    r.recall_n = safe_ratio(cm.tn, cm.tn + cm.fp);
    r.f1_n = f1_from(r.precision_n, r.recall_n);
    r.macro_f1 = 0.5 * (r.f1_f + r.f1_n);
    return r;
}

}  // namespace failbench
