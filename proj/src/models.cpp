#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "failbench/errors.hpp"
#include "failbench/models.hpp"

namespace failbench {

using json = nlohmann::ordered_json;

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::logreg: return "logreg";
        case Algorithm::random_forest: return "random_forest";
        case Algorithm::svm_rbf: return "svm_rbf";
        case Algorithm::lstm: return "lstm";
    }
    throw InvalidConfig("unknown algorithm id");
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "logreg") return Algorithm::logreg;
    if (name == "random_forest") return Algorithm::random_forest;
    if (name == "svm_rbf") return Algorithm::svm_rbf;
    if (name == "lstm") return Algorithm::lstm;
    throw InvalidConfig("unknown algorithm '" + name + "'");
}

namespace {

std::string trim_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::string describe(const Hyperparams& hyper) {
    if (const auto* h = std::get_if<LogregHyper>(&hyper)) {
        return "C=" + trim_number(h->C);
    }
    if (const auto* h = std::get_if<RfHyper>(&hyper)) {
        return "n_estimators=" + std::to_string(h->n_estimators) +
               ",max_features=" + trim_number(h->max_features_fraction);
    }
    if (const auto* h = std::get_if<SvmHyper>(&hyper)) {
        return "C=" + trim_number(h->C) +
               ",gamma=" + (h->gamma > 0.0 ? trim_number(h->gamma) : std::string("auto"));
    }
    const auto& h = std::get<LstmHyper>(hyper);
    return std::string("loss=") + (h.loss.kind == LossKind::bce ? "bce" : "sigmoid_f1") +
           ",hidden=" + std::to_string(h.hidden_size) +
           ",bidirectional=" + (h.bidirectional ? "true" : "false");
}

Standardizer Standardizer::fit(const Matrix& x) {
    Standardizer s;
    s.mean.assign(x.cols, 0.0);
    s.stddev.assign(x.cols, 1.0);
    if (x.rows == 0) return s;
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t d = 0; d < x.cols; ++d) s.mean[d] += x.at(i, d);
    }
    for (auto& m : s.mean) m /= static_cast<double>(x.rows);
    std::vector<double> var(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t d = 0; d < x.cols; ++d) {
            const double diff = x.at(i, d) - s.mean[d];
            var[d] += diff * diff;
        }
    }
    for (std::size_t d = 0; d < x.cols; ++d) {
        const double sd = std::sqrt(var[d] / static_cast<double>(x.rows));
        s.stddev[d] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

Standardizer Standardizer::fit_per_variable(const Matrix& x, std::size_t n_vars) {
    if (n_vars == 0 || x.cols % n_vars != 0) throw ShapeMismatch("feature width not a multiple of V");
    Standardizer s;
    s.mean.assign(x.cols, 0.0);
    s.stddev.assign(x.cols, 1.0);
    if (x.rows == 0) return s;

    std::vector<double> mean(n_vars, 0.0), var(n_vars, 0.0);
    const std::size_t per_var = x.rows * (x.cols / n_vars);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t d = 0; d < x.cols; ++d) mean[d % n_vars] += x.at(i, d);
    }
    for (auto& m : mean) m /= static_cast<double>(per_var);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t d = 0; d < x.cols; ++d) {
            const double diff = x.at(i, d) - mean[d % n_vars];
            var[d % n_vars] += diff * diff;
        }
    }
    for (std::size_t d = 0; d < x.cols; ++d) {
        const double sd = std::sqrt(var[d % n_vars] / static_cast<double>(per_var));
        s.mean[d] = mean[d % n_vars];
        s.stddev[d] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    if (x.cols != mean.size()) throw ShapeMismatch("feature width differs from fitted statistics");
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t d = 0; d < x.cols; ++d) {
            out.at(i, d) = (x.at(i, d) - mean[d]) / stddev[d];
        }
    }
    return out;
}

namespace {

Matrix windows_to_matrix(const std::vector<LabeledWindow>& windows) {
    if (windows.empty()) throw EmptyMatrix("no windows to train/predict on");
    const std::size_t cols = windows.front().features.size();
    Matrix x(windows.size(), cols);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].features.size() != cols) throw ShapeMismatch("inconsistent window shapes");
        std::copy(windows[i].features.begin(), windows[i].features.end(),
                  x.data.begin() + static_cast<std::ptrdiff_t>(i * cols));
    }
    return x;
}

std::vector<int> window_labels(const std::vector<LabeledWindow>& windows) {
    std::vector<int> y(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) y[i] = windows[i].failure ? 1 : 0;
    return y;
}

double feature_variance(const Matrix& x) {
    if (x.data.empty()) return 0.0;
    double mean = 0.0;
    for (double v : x.data) mean += v;
    mean /= static_cast<double>(x.data.size());
    double var = 0.0;
    for (double v : x.data) var += (v - mean) * (v - mean);
    return var / static_cast<double>(x.data.size());
}

}  // namespace

TrainedModel train_model(const ModelSpec& spec, const std::vector<LabeledWindow>& windows) {
    Matrix raw = windows_to_matrix(windows);
    const auto y = window_labels(windows);

    TrainedModel model;
    model.spec = spec;
    model.rw_samples = windows.front().rw_samples;
    model.n_variables = windows.front().n_variables;
    model.layout =
        spec.algorithm == Algorithm::lstm ? FeatureLayout::sequential : FeatureLayout::flattened;
    model.standardizer = model.layout == FeatureLayout::sequential
                             ? Standardizer::fit_per_variable(raw, model.n_variables)
                             : Standardizer::fit(raw);
    const Matrix x = model.standardizer.apply(raw);

    switch (spec.algorithm) {
        case Algorithm::logreg: {
            const auto& h = std::get<LogregHyper>(spec.hyper);
            model.core = train_logreg(x, y, h.C, spec.seed);
            break;
        }
        case Algorithm::random_forest: {
            const auto& h = std::get<RfHyper>(spec.hyper);
            model.core = train_rf(x, y, h.n_estimators, h.max_features_fraction, spec.seed);
            break;
        }
        case Algorithm::svm_rbf: {
            auto h = std::get<SvmHyper>(spec.hyper);
            if (h.gamma <= 0.0) {
                const double var = feature_variance(x);
                h.gamma = 1.0 / (static_cast<double>(x.cols) * (var > 1e-12 ? var : 1.0));
            }
            model.core = train_svm(x, y, h.C, h.gamma, spec.seed);
            break;
        }
        case Algorithm::lstm: {
            const auto& h = std::get<LstmHyper>(spec.hyper);
            model.core = train_lstm(x, model.rw_samples, model.n_variables, y, h, spec.seed);
            break;
        }
    }
    return model;
}

std::vector<Prediction> predict(const TrainedModel& model,
                                const std::vector<LabeledWindow>& windows) {
    Matrix raw = windows_to_matrix(windows);
    if (windows.front().rw_samples != model.rw_samples ||
        windows.front().n_variables != model.n_variables) {
        throw ShapeMismatch("window shape differs from training");
    }
    const Matrix x = model.standardizer.apply(raw);
    if (const auto* lr = std::get_if<LogregModel>(&model.core)) return predict_logreg(*lr, x);
    if (const auto* rf = std::get_if<ForestModel>(&model.core)) return predict_rf(*rf, x);
    if (const auto* svm = std::get_if<SvmModel>(&model.core)) return predict_svm(*svm, x);
    return predict_lstm(std::get<LstmModel>(model.core), x);
}

namespace {

json hyper_to_json(const Hyperparams& hyper) {
    json j;
    if (const auto* lr = std::get_if<LogregHyper>(&hyper)) {
        j["C"] = lr->C;
        return j;
    }
    if (const auto* rf = std::get_if<RfHyper>(&hyper)) {
        j["n_estimators"] = rf->n_estimators;
        j["max_features_fraction"] = rf->max_features_fraction;
        return j;
    }
    if (const auto* svm = std::get_if<SvmHyper>(&hyper)) {
        j["C"] = svm->C;
        j["gamma"] = svm->gamma;
        return j;
    }
    const auto& h = std::get<LstmHyper>(hyper);
    j["loss"] = h.loss.kind == LossKind::bce ? "bce" : "sigmoid_f1";
    j["beta"] = h.loss.beta;
    j["eta"] = h.loss.eta;
    j["hidden_size"] = h.hidden_size;
    j["bidirectional"] = h.bidirectional;
    j["epochs"] = h.epochs;
    j["batch_size"] = h.batch_size;
    j["learning_rate"] = h.learning_rate;
    j["validation_fraction"] = h.validation_fraction;
    j["patience"] = h.patience;
    return j;
}

Hyperparams hyper_from_json(Algorithm algo, const json& j) {
    switch (algo) {
        case Algorithm::logreg: return LogregHyper{j.at("C").get<double>()};
        case Algorithm::random_forest:
            return RfHyper{j.at("n_estimators").get<int>(),
                           j.at("max_features_fraction").get<double>()};
        case Algorithm::svm_rbf:
            return SvmHyper{j.at("C").get<double>(), j.at("gamma").get<double>()};
        case Algorithm::lstm: {
            LstmHyper h;
            h.loss.kind = j.at("loss").get<std::string>() == "bce" ? LossKind::bce
                                                                   : LossKind::sigmoid_f1;
            h.loss.beta = j.at("beta").get<double>();
            h.loss.eta = j.at("eta").get<double>();
            h.hidden_size = j.at("hidden_size").get<int>();
            h.bidirectional = j.at("bidirectional").get<bool>();
            h.epochs = j.at("epochs").get<int>();
            h.batch_size = j.at("batch_size").get<int>();
            h.learning_rate = j.at("learning_rate").get<double>();
            h.validation_fraction = j.at("validation_fraction").get<double>();
            h.patience = j.at("patience").get<int>();
            return h;
        }
    }
    throw InvalidConfig("unknown algorithm id");
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    json j;
    j["format"] = "failbench-model";
    j["version"] = 1;
    j["algorithm"] = algorithm_name(model.spec.algorithm);
    j["hyperparams"] = hyper_to_json(model.spec.hyper);
    j["seed"] = model.spec.seed;
    j["feature_layout"] = model.layout == FeatureLayout::flattened ? "flattened" : "sequential";
    j["rw_samples"] = model.rw_samples;
    j["n_variables"] = model.n_variables;
    j["standardizer"] = {{"mean", model.standardizer.mean}, {"stddev", model.standardizer.stddev}};

    json core;
    if (const auto* lr = std::get_if<LogregModel>(&model.core)) {
        core["weights"] = lr->weights;
        core["intercept"] = lr->intercept;
    } else if (const auto* rf = std::get_if<ForestModel>(&model.core)) {
        json trees = json::array();
        for (const auto& tree : rf->trees) {
            json t;
            auto& feature = t["feature"] = json::array();
            auto& threshold = t["threshold"] = json::array();
            auto& left = t["left"] = json::array();
            auto& right = t["right"] = json::array();
            auto& label = t["label"] = json::array();
            for (const auto& n : tree.nodes) {
                feature.push_back(n.feature);
                threshold.push_back(n.threshold);
                left.push_back(n.left);
                right.push_back(n.right);
                label.push_back(n.label);
            }
            trees.push_back(std::move(t));
        }
        core["trees"] = std::move(trees);
    } else if (const auto* svm = std::get_if<SvmModel>(&model.core)) {
        core["n_support"] = svm->support_vectors.rows;
        core["dim"] = svm->support_vectors.cols;
        core["support_vectors"] = svm->support_vectors.data;
        core["coeffs"] = svm->coeffs;
        core["bias"] = svm->bias;
        core["gamma"] = svm->gamma;
    } else {
        const auto& lstm = std::get<LstmModel>(model.core);
        core["hidden_size"] = lstm.hidden_size;
        core["bidirectional"] = lstm.bidirectional;
        core["seq_len"] = lstm.seq_len;
        core["n_vars"] = lstm.n_vars;
        core["params"] = lstm.params;
    }
    j["core"] = std::move(core);
    return j.dump();
}

TrainedModel deserialize_model(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != "failbench-model") throw InvalidConfig("not a model record");

    TrainedModel model;
    model.spec.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    model.spec.hyper = hyper_from_json(model.spec.algorithm, j.at("hyperparams"));
    model.spec.seed = j.at("seed").get<std::uint64_t>();
    model.layout = j.at("feature_layout").get<std::string>() == "flattened"
                       ? FeatureLayout::flattened
                       : FeatureLayout::sequential;
    model.rw_samples = j.at("rw_samples").get<std::size_t>();
    model.n_variables = j.at("n_variables").get<std::size_t>();
    model.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    model.standardizer.stddev = j.at("standardizer").at("stddev").get<std::vector<double>>();

    const json& core = j.at("core");
    switch (model.spec.algorithm) {
        case Algorithm::logreg: {
            LogregModel lr;
            lr.weights = core.at("weights").get<std::vector<double>>();
            lr.intercept = core.at("intercept").get<double>();
            model.core = std::move(lr);
            break;
        }
        case Algorithm::random_forest: {
            ForestModel rf;
            for (const auto& t : core.at("trees")) {
                Tree tree;
                const auto feature = t.at("feature").get<std::vector<int>>();
                const auto threshold = t.at("threshold").get<std::vector<double>>();
                const auto left = t.at("left").get<std::vector<int>>();
                const auto right = t.at("right").get<std::vector<int>>();
                const auto label = t.at("label").get<std::vector<int>>();
                tree.nodes.resize(feature.size());
                for (std::size_t i = 0; i < feature.size(); ++i) {
                    tree.nodes[i] = {feature[i], threshold[i], left[i], right[i], label[i]};
                }
                rf.trees.push_back(std::move(tree));
            }
            model.core = std::move(rf);
            break;
        }
        case Algorithm::svm_rbf: {
            SvmModel svm;
            svm.support_vectors.rows = core.at("n_support").get<std::size_t>();
            svm.support_vectors.cols = core.at("dim").get<std::size_t>();
            svm.support_vectors.data = core.at("support_vectors").get<std::vector<double>>();
            svm.coeffs = core.at("coeffs").get<std::vector<double>>();
            svm.bias = core.at("bias").get<double>();
            svm.gamma = core.at("gamma").get<double>();
            model.core = std::move(svm);
            break;
        }
        case Algorithm::lstm: {
            LstmModel lstm;
            lstm.hidden_size = core.at("hidden_size").get<std::size_t>();
            lstm.bidirectional = core.at("bidirectional").get<bool>();
            lstm.seq_len = core.at("seq_len").get<std::size_t>();
            lstm.n_vars = core.at("n_vars").get<std::size_t>();
            lstm.params = core.at("params").get<std::vector<double>>();
            model.core = std::move(lstm);
            break;
        }
    }
    return model;
}

}  // namespace failbench
