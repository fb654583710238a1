#include <fstream>
#include <set>

#include "failbench/errors.hpp"
#include "failbench/io.hpp"

namespace failbench {

namespace {

using json = nlohmann::ordered_json;

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InvalidConfig("config parse error in " + path.string() + ": " + e.what());
    }
    return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
    if (!j.is_object()) throw InvalidConfig(context + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw InvalidConfig("unknown key '" + key + "' in " + context);
    }
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) throw InvalidConfig("missing key '" + key + "' in " + context);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidConfig("bad value for '" + key + "' in " + context);
    }
}

template <typename T>
T optional_or(const json& j, const std::string& key, const std::string& context, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidConfig("bad value for '" + key + "' in " + context);
    }
}

std::vector<Seconds> parse_duration_list(const json& j, const std::string& key,
                                         const std::string& context) {
    const auto strings = require<std::vector<std::string>>(j, key, context);
    if (strings.empty()) throw InvalidConfig("'" + key + "' must be non-empty in " + context);
    std::vector<Seconds> out;
    out.reserve(strings.size());
    for (const auto& s : strings) out.push_back(parse_duration(s));
    return out;
}

LossConfig parse_loss(const json& setting, const std::string& context) {
    LossConfig loss;
    const auto kind = optional_or<std::string>(setting, "loss", context, "bce");
    if (kind == "bce") loss.kind = LossKind::bce;
    else if (kind == "sigmoid_f1") loss.kind = LossKind::sigmoid_f1;
    else throw InvalidConfig("loss must be 'bce' or 'sigmoid_f1' in " + context);
    loss.beta = optional_or<double>(setting, "beta", context, 1.0);
    loss.eta = optional_or<double>(setting, "eta", context, 0.0);
    if (loss.beta <= 0.0) throw InvalidConfig("loss beta must be positive in " + context);
    return loss;
}

Hyperparams parse_setting(Algorithm algo, const json& setting, const std::string& context) {
    switch (algo) {
        case Algorithm::logreg: {
            check_keys(setting, {"C"}, context);
            const auto c = require<double>(setting, "C", context);
            if (c <= 0.0) throw InvalidConfig("C must be positive in " + context);
            return LogregHyper{c};
        }
        case Algorithm::random_forest: {
            check_keys(setting, {"n_estimators", "max_features_fraction"}, context);
            RfHyper h;
            h.n_estimators = require<int>(setting, "n_estimators", context);
            h.max_features_fraction = require<double>(setting, "max_features_fraction", context);
            if (h.n_estimators < 1) throw InvalidConfig("n_estimators must be >= 1 in " + context);
            if (h.max_features_fraction <= 0.0 || h.max_features_fraction > 1.0) {
                throw InvalidConfig("max_features_fraction must be in (0,1] in " + context);
            }
            return h;
        }
        case Algorithm::svm_rbf: {
            check_keys(setting, {"C", "gamma"}, context);
            SvmHyper h;
            h.C = require<double>(setting, "C", context);
            if (h.C <= 0.0) throw InvalidConfig("C must be positive in " + context);
            if (setting.contains("gamma") && setting.at("gamma").is_number()) {
                h.gamma = setting.at("gamma").get<double>();
                if (h.gamma <= 0.0) throw InvalidConfig("gamma must be positive in " + context);
            } else if (setting.contains("gamma")) {
                const auto g = setting.at("gamma").get<std::string>();
                if (g != "auto") throw InvalidConfig("gamma must be a number or 'auto' in " + context);
                h.gamma = 0.0;
            }
            return h;
        }
        case Algorithm::lstm: {
            check_keys(setting,
                       {"loss", "beta", "eta", "hidden_size", "bidirectional", "epochs",
                        "batch_size", "learning_rate", "validation_fraction", "patience"},
                       context);
            LstmHyper h;
            h.loss = parse_loss(setting, context);
            h.hidden_size = optional_or<int>(setting, "hidden_size", context, 64);
            h.bidirectional = optional_or<bool>(setting, "bidirectional", context, false);
            h.epochs = optional_or<int>(setting, "epochs", context, 50);
            h.batch_size = optional_or<int>(setting, "batch_size", context, 32);
            h.learning_rate = optional_or<double>(setting, "learning_rate", context, 1e-3);
            h.validation_fraction = optional_or<double>(setting, "validation_fraction", context, 0.1);
            h.patience = optional_or<int>(setting, "patience", context, 5);
            if (h.hidden_size < 1 || h.epochs < 1 || h.batch_size < 1 || h.learning_rate <= 0.0 ||
                h.validation_fraction < 0.0 || h.validation_fraction >= 1.0) {
                throw InvalidConfig("bad LSTM setting in " + context);
            }
            return h;
        }
    }
    throw InvalidConfig("unknown algorithm in " + context);
}

HyperGrid parse_hypergrid(const json& j) {
    if (!j.is_object() || j.empty()) throw InvalidConfig("hypergrid must list at least one algorithm");
    HyperGrid grid;
    for (const auto& [name, settings] : j.items()) {
        AlgorithmSettings entry;
        entry.algorithm = algorithm_from_name(name);
        if (!settings.is_array() || settings.empty()) {
            throw InvalidConfig("hypergrid." + name + " must be a non-empty array");
        }
        std::size_t idx = 0;
        for (const auto& s : settings) {
            entry.settings.push_back(
                parse_setting(entry.algorithm, s, "hypergrid." + name + "[" + std::to_string(idx) + "]"));
            ++idx;
        }
        grid.algorithms.push_back(std::move(entry));
    }
    return grid;
}

ProtocolConfig parse_protocol(const json& j) {
    check_keys(j, {"kind", "k", "rus_repeats", "rus_pairing", "split", "search"}, "protocol");
    ProtocolConfig p;
    const auto kind = require<std::string>(j, "kind", "protocol");
    if (kind == "kfold_rus") p.kind = ProtocolKind::kfold_rus;
    else if (kind == "holdout_weighted") p.kind = ProtocolKind::holdout_weighted;
    else throw InvalidConfig("protocol.kind must be 'kfold_rus' or 'holdout_weighted'");

    p.k = optional_or<std::size_t>(j, "k", "protocol", 5);
    p.rus_repeats = optional_or<std::size_t>(j, "rus_repeats", "protocol", 10);
    if (p.rus_repeats < 1) throw InvalidConfig("protocol.rus_repeats must be >= 1");
    if (p.kind == ProtocolKind::kfold_rus && p.k < 2) throw InvalidConfig("protocol.k must be >= 2");

    const auto pairing = optional_or<std::string>(j, "rus_pairing", "protocol", "paired");
    if (pairing == "paired") p.rus_pairing = RusPairing::paired;
    else if (pairing == "crossed") p.rus_pairing = RusPairing::crossed;
    else throw InvalidConfig("protocol.rus_pairing must be 'paired' or 'crossed'");

    if (j.contains("split")) {
        const auto& split = j.at("split");
        check_keys(split, {"train", "validation", "test"}, "protocol.split");
        p.train_fraction = require<double>(split, "train", "protocol.split");
        p.validation_fraction = require<double>(split, "validation", "protocol.split");
        p.test_fraction = require<double>(split, "test", "protocol.split");
        if (std::abs(p.train_fraction + p.validation_fraction + p.test_fraction - 1.0) > 1e-9) {
            throw InvalidConfig("protocol.split fractions must sum to 1");
        }
    }
    if (j.contains("search")) {
        const auto& search = j.at("search");
        check_keys(search, {"kind", "n"}, "protocol.search");
        const auto sk = require<std::string>(search, "kind", "protocol.search");
        if (sk == "grid") {
            p.search.random = false;
        } else if (sk == "random") {
            p.search.random = true;
            p.search.n_draws = require<std::size_t>(search, "n", "protocol.search");
            if (p.search.n_draws < 1) throw InvalidConfig("protocol.search.n must be >= 1");
        } else {
            throw InvalidConfig("protocol.search.kind must be 'grid' or 'random'");
        }
    }
    return p;
}

}  // namespace

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    check_keys(j,
               {"telemetry", "alerts", "period", "movement_variables", "whole_dataset_session",
                "inactivity_gap", "target_alert_code", "profile_window", "rw", "pw", "protocol",
                "hypergrid", "seed", "out_dir"},
               "config");

    RunConfig cfg;
    cfg.echo = j;
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    cfg.telemetry_csv = resolve(require<std::string>(j, "telemetry", "config"));
    cfg.alerts_csv = resolve(require<std::string>(j, "alerts", "config"));
    cfg.period_s = parse_duration(require<std::string>(j, "period", "config"));

    cfg.whole_dataset_session = optional_or<bool>(j, "whole_dataset_session", "config", false);
    if (j.contains("movement_variables")) {
        cfg.movement_variables =
            require<std::vector<std::string>>(j, "movement_variables", "config");
    }
    if (!cfg.whole_dataset_session && cfg.movement_variables.empty()) {
        throw InvalidConfig("config needs movement_variables or whole_dataset_session=true");
    }
    if (cfg.whole_dataset_session && !cfg.movement_variables.empty()) {
        throw InvalidConfig("movement_variables and whole_dataset_session are mutually exclusive");
    }
    if (j.contains("inactivity_gap")) {
        cfg.inactivity_gap_s = parse_duration(j.at("inactivity_gap").get<std::string>());
    }
    cfg.target_alert_code = require<int>(j, "target_alert_code", "config");
    if (cfg.target_alert_code < 0) throw InvalidConfig("target_alert_code must be >= 0");
    if (j.contains("profile_window")) {
        cfg.profile_window_s = parse_duration(j.at("profile_window").get<std::string>());
    }
    cfg.rw_s = parse_duration_list(j, "rw", "config");
    cfg.pw_s = parse_duration_list(j, "pw", "config");
    if (!j.contains("protocol")) throw InvalidConfig("missing key 'protocol' in config");
    cfg.protocol = parse_protocol(j.at("protocol"));
    if (!j.contains("hypergrid")) throw InvalidConfig("missing key 'hypergrid' in config");
    cfg.hypergrid = parse_hypergrid(j.at("hypergrid"));
    cfg.seed = optional_or<std::uint64_t>(j, "seed", "config", 0);
    cfg.out_dir = resolve(optional_or<std::string>(j, "out_dir", "config", "out"));
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return run_config_from_json(load_json_file(path), path.parent_path());
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    check_keys(j,
               {"n_variables", "n_movement", "n_sessions", "session_rows", "period", "gap",
                "fault_rate", "lead_time", "diversity_knob", "noise_sigma", "sample_dropout",
                "alert_code", "seed", "order_sensitive", "order_window_rows", "n_order_windows"},
               "synth config");
    SynthConfig c;
    c.n_variables = optional_or<std::size_t>(j, "n_variables", "synth config", c.n_variables);
    c.n_movement = optional_or<std::size_t>(j, "n_movement", "synth config", c.n_movement);
    c.n_sessions = optional_or<std::size_t>(j, "n_sessions", "synth config", c.n_sessions);
    if (j.contains("session_rows")) {
        const auto range = j.at("session_rows").get<std::vector<std::size_t>>();
        if (range.size() != 2) throw InvalidConfig("session_rows must be [min, max]");
        c.session_min_rows = range[0];
        c.session_max_rows = range[1];
    }
    if (j.contains("period")) c.period_s = parse_duration(j.at("period").get<std::string>());
    if (j.contains("gap")) c.gap_s = parse_duration(j.at("gap").get<std::string>());
    c.fault_rate = optional_or<double>(j, "fault_rate", "synth config", c.fault_rate);
    if (j.contains("lead_time")) c.lead_time_s = parse_duration(j.at("lead_time").get<std::string>());
    c.diversity_knob = optional_or<double>(j, "diversity_knob", "synth config", c.diversity_knob);
    c.noise_sigma = optional_or<double>(j, "noise_sigma", "synth config", c.noise_sigma);
    c.sample_dropout = optional_or<double>(j, "sample_dropout", "synth config", c.sample_dropout);
    c.alert_code = optional_or<int>(j, "alert_code", "synth config", c.alert_code);
    c.seed = optional_or<std::uint64_t>(j, "seed", "synth config", c.seed);
    c.order_sensitive = optional_or<bool>(j, "order_sensitive", "synth config", c.order_sensitive);
    c.order_window_rows =
        optional_or<std::size_t>(j, "order_window_rows", "synth config", c.order_window_rows);
    c.n_order_windows =
        optional_or<std::size_t>(j, "n_order_windows", "synth config", c.n_order_windows);
    return c;
}

}  // namespace failbench
