#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "failbench/losses.hpp"
#include "failbench/windows.hpp"

namespace failbench {

// Row-major dense matrix; the only tensor type crossing module boundaries.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
};

enum class Algorithm { logreg, random_forest, svm_rbf, lstm };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct LogregHyper {
    double C = 1.0;  // inverse regularization strength
};

struct RfHyper {
    int n_estimators = 100;
    double max_features_fraction = 1.0;  // fraction of features per split, (0, 1]
};

struct SvmHyper {
    double C = 1.0;
    double gamma = 0.0;  // 0 = auto: 1 / (D * var(features))
};

struct LstmHyper {
    LossConfig loss;
    int hidden_size = 64;
    bool bidirectional = false;
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double validation_fraction = 0.1;  // 0 disables early stopping
    int patience = 5;
};

using Hyperparams = std::variant<LogregHyper, RfHyper, SvmHyper, LstmHyper>;

// Compact "key=value,..." form used in result tables and manifests.
std::string describe(const Hyperparams& hyper);

struct ModelSpec {
    Algorithm algorithm = Algorithm::logreg;
    Hyperparams hyper = LogregHyper{};
    std::uint64_t seed = 0;
};

struct LogregModel {
    std::vector<double> weights;
    double intercept = 0.0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;  // leaf vote
};

struct Tree {
    std::vector<TreeNode> nodes;
};

struct ForestModel {
    std::vector<Tree> trees;
};

struct SvmModel {
    Matrix support_vectors;      // S x D
    std::vector<double> coeffs;  // alpha_i * y_i per support vector
    double bias = 0.0;
    double gamma = 1.0;
};

struct LstmModel {
    std::size_t hidden_size = 0;
    bool bidirectional = false;
    std::size_t seq_len = 0;
    std::size_t n_vars = 0;
    std::vector<double> params;  // flat layout, see LstmCore
};

enum class FeatureLayout { flattened, sequential };

// Per-feature affine scaling fitted on the train split. For sequential
// layouts the statistics are per variable, expanded to the full feature
// width so application is uniform.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const Matrix& x);
    static Standardizer fit_per_variable(const Matrix& x, std::size_t n_vars);
    Matrix apply(const Matrix& x) const;
};

struct TrainedModel {
    ModelSpec spec;
    FeatureLayout layout = FeatureLayout::flattened;
    Standardizer standardizer;
    std::size_t rw_samples = 0;
    std::size_t n_variables = 0;
    std::variant<LogregModel, ForestModel, SvmModel, LstmModel> core;
};

struct Prediction {
    double probability = 0.0;
    int label = 0;
};

// Low-level trainers; features are expected already standardized.
LogregModel train_logreg(const Matrix& x, const std::vector<int>& y, double C, std::uint64_t seed);
ForestModel train_rf(const Matrix& x, const std::vector<int>& y, int n_estimators,
                     double max_features_fraction, std::uint64_t seed);
SvmModel train_svm(const Matrix& x, const std::vector<int>& y, double C, double gamma,
                   std::uint64_t seed);
LstmModel train_lstm(const Matrix& x, std::size_t seq_len, std::size_t n_vars,
                     const std::vector<int>& y, const LstmHyper& hyper, std::uint64_t seed);

std::vector<Prediction> predict_logreg(const LogregModel& model, const Matrix& x);
std::vector<Prediction> predict_rf(const ForestModel& model, const Matrix& x);
std::vector<Prediction> predict_svm(const SvmModel& model, const Matrix& x);
std::vector<Prediction> predict_lstm(const LstmModel& model, const Matrix& x);

// Raw RBF decision value, exposed for the dual-constraint checks.
double svm_decision(const SvmModel& model, const double* x, std::size_t dim);

// Window-level contract: flattening, standardization and dispatch in one
// place so every algorithm trains and predicts through the same interface.
TrainedModel train_model(const ModelSpec& spec, const std::vector<LabeledWindow>& windows);
std::vector<Prediction> predict(const TrainedModel& model,
                                const std::vector<LabeledWindow>& windows);

// Self-describing JSON record (hyperparameters, parameter arrays, feature
// layout, standardization statistics). Round-trips bit-exactly.
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& text);

}  // namespace failbench
