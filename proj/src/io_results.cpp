#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "failbench/errors.hpp"
#include "failbench/io.hpp"

namespace failbench {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_finite_or_null(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json hyper_record(const Hyperparams& hyper) {
    json j;
    if (const auto* lr = std::get_if<LogregHyper>(&hyper)) {
        j["algorithm"] = "logreg";
        j["C"] = lr->C;
    } else if (const auto* rf = std::get_if<RfHyper>(&hyper)) {
        j["algorithm"] = "random_forest";
        j["n_estimators"] = rf->n_estimators;
        j["max_features_fraction"] = rf->max_features_fraction;
    } else if (const auto* svm = std::get_if<SvmHyper>(&hyper)) {
        j["algorithm"] = "svm_rbf";
        j["C"] = svm->C;
        j["gamma"] = svm->gamma;
    } else {
        const auto& h = std::get<LstmHyper>(hyper);
        j["algorithm"] = "lstm";
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
    }
    return j;
}

Hyperparams hyper_from_record(const json& j) {
    const auto algo = algorithm_from_name(j.at("algorithm").get<std::string>());
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
    throw InvalidConfig("unknown algorithm in table record");
}

std::string short_name(Algorithm a) {
    switch (a) {
        case Algorithm::logreg: return "LR";
        case Algorithm::random_forest: return "RF";
        case Algorithm::svm_rbf: return "SVM";
        case Algorithm::lstm: return "LSTM";
    }
    return "?";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputUnwritable(path.string());
    out << text;
    if (!out.flush()) throw OutputUnwritable(path.string());
}

}  // namespace

json table_to_json(const ResultTable& table) {
    json j;
    j["rw_s"] = table.rw_s;
    j["pw_s"] = table.pw_s;
    auto& cells = j["cells"] = json::array();
    for (const auto& cell : table.cells) {
        json c;
        c["rw_s"] = cell.rw_s;
        c["pw_s"] = cell.pw_s;
        c["status"] = cell.status == CellStatus::ok ? "ok" : "undefined";
        c["n_windows"] = cell.n_windows;
        c["support"] = cell.support;
        c["has_warnings"] = cell.has_warnings;
        c["best_algorithm"] = cell.best_algorithm;
        c["best_score"] = finite_or_null(cell.best_score);
        auto& algos = c["algorithms"] = json::array();
        for (const auto& ar : cell.algorithms) {
            json a;
            a["algorithm"] = algorithm_name(ar.algorithm);
            a["best_setting"] = ar.best_setting;
            a["best_score"] = finite_or_null(ar.best_score);
            auto& settings = a["settings"] = json::array();
            for (const auto& s : ar.settings) {
                json sj;
                sj["hyper"] = hyper_record(s.setting);
                sj["desc"] = s.setting_desc;
                sj["mean_f1"] = finite_or_null(s.mean_f1);
                sj["std_f1"] = finite_or_null(s.std_f1);
                sj["mean_precision"] = finite_or_null(s.mean_precision);
                sj["mean_recall"] = finite_or_null(s.mean_recall);
                sj["n_scores"] = s.n_scores;
                sj["n_failures"] = s.n_failures;
                settings.push_back(std::move(sj));
            }
            algos.push_back(std::move(a));
        }
        cells.push_back(std::move(c));
    }
    return j;
}

ResultTable table_from_json(const json& j) {
    ResultTable table;
    table.rw_s = j.at("rw_s").get<std::vector<Seconds>>();
    table.pw_s = j.at("pw_s").get<std::vector<Seconds>>();
    for (const auto& c : j.at("cells")) {
        CellResult cell;
        cell.rw_s = c.at("rw_s").get<Seconds>();
        cell.pw_s = c.at("pw_s").get<Seconds>();
        cell.status = c.at("status").get<std::string>() == "ok" ? CellStatus::ok
                                                                : CellStatus::undefined;
        cell.n_windows = c.at("n_windows").get<std::size_t>();
        cell.support = c.at("support").get<std::size_t>();
        cell.has_warnings = c.at("has_warnings").get<bool>();
        cell.best_algorithm = c.at("best_algorithm").get<std::size_t>();
        cell.best_score = from_finite_or_null(c.at("best_score"));
        for (const auto& a : c.at("algorithms")) {
            AlgorithmResult ar;
            ar.algorithm = algorithm_from_name(a.at("algorithm").get<std::string>());
            ar.best_setting = a.at("best_setting").get<std::size_t>();
            ar.best_score = from_finite_or_null(a.at("best_score"));
            for (const auto& s : a.at("settings")) {
                SettingAggregate agg;
                agg.setting = hyper_from_record(s.at("hyper"));
                agg.setting_desc = s.at("desc").get<std::string>();
                agg.mean_f1 = from_finite_or_null(s.at("mean_f1"));
                agg.std_f1 = from_finite_or_null(s.at("std_f1"));
                agg.mean_precision = from_finite_or_null(s.at("mean_precision"));
                agg.mean_recall = from_finite_or_null(s.at("mean_recall"));
                agg.n_scores = s.at("n_scores").get<std::size_t>();
                agg.n_failures = s.at("n_failures").get<std::size_t>();
                ar.settings.push_back(std::move(agg));
            }
            cell.algorithms.push_back(std::move(ar));
        }
        table.cells.push_back(std::move(cell));
    }
    return table;
}

std::string results_csv_text(const ResultTable& table) {
    struct Row {
        Seconds rw, pw;
        std::string algorithm;
        std::size_t setting_index;
        const SettingAggregate* agg;
        const CellResult* cell;
    };
    std::vector<Row> rows;
    for (const auto& cell : table.cells) {
        for (const auto& ar : cell.algorithms) {
            for (std::size_t l = 0; l < ar.settings.size(); ++l) {
                rows.push_back({cell.rw_s, cell.pw_s, algorithm_name(ar.algorithm), l,
                                &ar.settings[l], &cell});
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.rw, a.pw, a.algorithm, a.setting_index) <
               std::tie(b.rw, b.pw, b.algorithm, b.setting_index);
    });

    std::ostringstream out;
    out << "rw,pw,algorithm,setting,mean_macro_f1,std_macro_f1,mean_macro_precision,"
           "mean_macro_recall,n_scores,n_failures,support,status\n";
    for (const auto& r : rows) {
        out << format_duration(r.rw) << ',' << format_duration(r.pw) << ',' << r.algorithm << ','
            << '"' << r.agg->setting_desc << '"' << ',';
        if (r.cell->status == CellStatus::ok && r.agg->n_scores > 0) {
            out << fmt(r.agg->mean_f1) << ',' << fmt(r.agg->std_f1) << ','
                << fmt(r.agg->mean_precision) << ',' << fmt(r.agg->mean_recall);
        } else {
            out << ",,,";
        }
        out << ',' << r.agg->n_scores << ',' << r.agg->n_failures << ',' << r.cell->support << ','
            << (r.cell->status == CellStatus::ok ? "ok" : "undefined") << '\n';
    }
    return out.str();
}

std::string best_csv_text(const ResultTable& table) {
    struct Row {
        const CellResult* cell;
    };
    std::vector<const CellResult*> cells;
    for (const auto& cell : table.cells) cells.push_back(&cell);
    std::sort(cells.begin(), cells.end(), [](const CellResult* a, const CellResult* b) {
        return std::tie(a->rw_s, a->pw_s) < std::tie(b->rw_s, b->pw_s);
    });

    std::ostringstream out;
    out << "rw,pw,status,best_algorithm,best_setting,best_macro_f1,support,n_windows\n";
    for (const auto* cell : cells) {
        out << format_duration(cell->rw_s) << ',' << format_duration(cell->pw_s) << ','
            << (cell->status == CellStatus::ok ? "ok" : "undefined") << ',';
        if (cell->status == CellStatus::ok && !cell->algorithms.empty()) {
            const auto& ar = cell->algorithms[cell->best_algorithm];
            out << algorithm_name(ar.algorithm) << ','
                << '"' << ar.settings[ar.best_setting].setting_desc << '"' << ','
                << fmt(cell->best_score);
        } else {
            out << ",,";
        }
        out << ',' << cell->support << ',' << cell->n_windows << '\n';
    }
    return out.str();
}

std::string heatmap_svg_text(const ResultTable& table) {
    // RW rows x PW columns, annotated with the winning algorithm and score.
    // Fill lightness is an affine map of the score so lighter = better holds
    // across the whole figure; undefined cells stay blank.
    const std::size_t n_rows = table.rw_s.size();
    const std::size_t n_cols = table.pw_s.size();
    constexpr int cell_w = 96, cell_h = 48, left = 86, top = 58, pad = 8;
    const int width = left + static_cast<int>(n_cols) * cell_w + pad;
    const int height = top + static_cast<int>(n_rows) * cell_h + pad;

    std::vector<Seconds> rw_sorted = table.rw_s;
    std::vector<Seconds> pw_sorted = table.pw_s;
    std::sort(rw_sorted.begin(), rw_sorted.end());
    std::sort(pw_sorted.begin(), pw_sorted.end());
    auto rw_index = [&](Seconds v) {
        return static_cast<std::size_t>(std::find(table.rw_s.begin(), table.rw_s.end(), v) -
                                        table.rw_s.begin());
    };
    auto pw_index = [&](Seconds v) {
        return static_cast<std::size_t>(std::find(table.pw_s.begin(), table.pw_s.end(), v) -
                                        table.pw_s.begin());
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <style>text{font-family:monospace;font-size:12px}</style>\n";
    out << "  <text x=\"" << left << "\" y=\"16\">best macro F1 per (RW, PW); lighter is "
           "better</text>\n";

    for (std::size_t c = 0; c < n_cols; ++c) {
        out << "  <text x=\"" << left + static_cast<int>(c) * cell_w + cell_w / 2 << "\" y=\""
            << top - 10 << "\" text-anchor=\"middle\">" << format_duration(pw_sorted[c])
            << "</text>\n";
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        out << "  <text x=\"" << left - 8 << "\" y=\""
            << top + static_cast<int>(r) * cell_h + cell_h / 2 + 4
            << "\" text-anchor=\"end\">" << format_duration(rw_sorted[r]) << "</text>\n";
    }

    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            const auto& cell = table.at(rw_index(rw_sorted[r]), pw_index(pw_sorted[c]));
            const int x = left + static_cast<int>(c) * cell_w;
            const int y = top + static_cast<int>(r) * cell_h;
            if (cell.status != CellStatus::ok || !std::isfinite(cell.best_score)) {
                out << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w
                    << "\" height=\"" << cell_h
                    << "\" fill=\"#ffffff\" stroke=\"#999999\" stroke-dasharray=\"3,3\"/>\n";
                continue;
            }
            const double score = std::clamp(cell.best_score, 0.0, 1.0);
            char light[32];
            std::snprintf(light, sizeof(light), "%.4f", 15.0 + 80.0 * score);
            out << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w
                << "\" height=\"" << cell_h << "\" fill=\"rgb(" << light << "%," << light << "%,"
                << light << "%)\" stroke=\"#333333\"/>\n";
            const char* text_fill = score >= 0.45 ? "#000000" : "#ffffff";
            const auto& ar = cell.algorithms[cell.best_algorithm];
            char score_txt[16];
            std::snprintf(score_txt, sizeof(score_txt), "%.3f", cell.best_score);
            out << "  <text x=\"" << x + cell_w / 2 << "\" y=\"" << y + cell_h / 2 - 3
                << "\" text-anchor=\"middle\" fill=\"" << text_fill << "\">"
                << short_name(ar.algorithm) << "</text>\n";
            out << "  <text x=\"" << x + cell_w / 2 << "\" y=\"" << y + cell_h / 2 + 14
                << "\" text-anchor=\"middle\" fill=\"" << text_fill << "\">" << score_txt
                << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

void emit_results(const ResultTable& table, const std::filesystem::path& outdir,
                  const RunContextInfo& info) {
    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);
    if (ec) throw OutputUnwritable(outdir.string());

    write_text_file(outdir / "results.csv", results_csv_text(table));
    write_text_file(outdir / "best.csv", best_csv_text(table));
    write_text_file(outdir / "heatmap.svg", heatmap_svg_text(table));

    json manifest;
    manifest["format"] = "failbench-manifest";
    manifest["version"] = 1;
    manifest["tool"] = {{"name", "failbench"}, {"version", "0.1.0"}};
    manifest["seed"] = info.seed;
    manifest["jobs"] = info.jobs;
    manifest["timings"] = {{"total_s", info.total_seconds}};
    manifest["config"] = info.config_echo;
    manifest["table"] = table_to_json(table);
    write_text_file(outdir / "manifest.json", manifest.dump(2) + "\n");
}

void render_report(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& outdir) {
    std::ifstream in(manifest_path);
    if (!in) throw InvalidConfig("cannot open manifest " + manifest_path.string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::parse_error& e) {
        throw InvalidConfig(std::string("manifest parse error: ") + e.what());
    }
    if (manifest.value("format", "") != "failbench-manifest") {
        throw InvalidConfig("not a failbench manifest: " + manifest_path.string());
    }
    const ResultTable table = table_from_json(manifest.at("table"));

    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);
    if (ec) throw OutputUnwritable(outdir.string());
    write_text_file(outdir / "results.csv", results_csv_text(table));
    write_text_file(outdir / "best.csv", best_csv_text(table));
    write_text_file(outdir / "heatmap.svg", heatmap_svg_text(table));
}

}  // namespace failbench
