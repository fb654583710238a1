#include "failbench/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <nlohmann/json.hpp>

#include "failbench/errors.hpp"
#include "failbench/io.hpp"
#include "failbench/protocol.hpp"
#include "failbench/series.hpp"
#include "failbench/sessions.hpp"
#include "failbench/synthgen.hpp"

namespace failbench {

namespace {

using json = nlohmann::ordered_json;

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("FAILBENCH_LOG");
    if (!env) return LogLevel::info;
    const std::string v(env);
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
}

struct LoadedDataset {
    RegularSeries series;
    SessionMap sessions;
    AlertLog alerts_all;
    AlertLog alerts_target;
    IngestReport report;
};

// Shared front half of every subcommand: ingest, resample onto the grid
// covering every variable's observed range, derive sessions.
LoadedDataset load_dataset(const RunConfig& cfg) {
    LoadedDataset data;
    auto [raw, alerts, rep] = ingest(cfg.telemetry_csv, cfg.alerts_csv);
    data.report = rep;
    data.alerts_all = alerts;

    Timestamp span_start{std::numeric_limits<std::int64_t>::min()};
    Timestamp span_end{std::numeric_limits<std::int64_t>::min()};
    for (const auto& samples : raw.samples) {
        span_start = std::max(span_start, samples.front().time);
        span_end = std::max(span_end, samples.back().time);
    }
    data.series = resample_locf(raw, cfg.period_s, span_start, span_end);
    data.sessions = cfg.whole_dataset_session
                        ? whole_dataset_session(data.series)
                        : compute_sessions(data.series,
                                           {cfg.movement_variables, cfg.inactivity_gap_s});
    data.alerts_target = alerts.filtered(cfg.target_alert_code);
    return data;
}

int cmd_validate(const std::string& config_path) {
    const RunConfig cfg = load_run_config(config_path);
    const LoadedDataset data = load_dataset(cfg);
    json out;
    out["telemetry_rows"] = data.report.telemetry_rows;
    out["alert_rows"] = data.report.alert_rows;
    out["duplicate_cells"] = data.report.duplicate_cells;
    out["variables"] = data.series.variables;
    out["grid_rows"] = data.series.rows;
    out["sessions"] = session_spans(data.sessions).size();
    out["target_alerts"] = data.alerts_target.events.size();
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_sessionize(const std::string& config_path, const std::string& out_path) {
    const RunConfig cfg = load_run_config(config_path);
    const LoadedDataset data = load_dataset(cfg);
    if (out_path.empty()) {
        std::cout << "timestamp,session_id\n";
        for (std::size_t k = 0; k < data.series.rows; ++k) {
            std::cout << format_iso8601(data.series.row_time(k)) << ',' << data.sessions.ids[k]
                      << '\n';
        }
    } else {
        write_sessions_csv(out_path, data.series, data.sessions);
    }
    return 0;
}

int cmd_profile(const std::string& config_path) {
    const RunConfig cfg = load_run_config(config_path);
    const LoadedDataset data = load_dataset(cfg);
    const RegularSeries normalized = minmax_normalize(data.series);
    DatasetProfile profile;
    profile.window_s = cfg.profile_window_s;
    profile.spectral_entropy = spectral_entropy(normalized);
    profile.diversity_m = precursor_diversity(normalized, data.alerts_target, cfg.profile_window_s);
    json out;
    out["diversity_m"] = profile.diversity_m;
    out["spectral_entropy"] = profile.spectral_entropy;
    out["window"] = format_duration(profile.window_s);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_run(const std::string& config_path, std::uint64_t* seed_override,
            std::size_t* jobs_override, const std::string& out_override) {
    RunConfig cfg = load_run_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    const std::size_t jobs = jobs_override ? *jobs_override : 1;
    if (!out_override.empty()) cfg.out_dir = out_override;

    const LoadedDataset data = load_dataset(cfg);
    const DatasetBundle bundle{data.series, data.sessions, data.alerts_target};

    const LogLevel level = log_level();
    ProgressFn progress = nullptr;
    if (level >= LogLevel::info) {
        progress = [](const CellEvent& e) {
            json line;
            line["event"] = e.kind == CellEvent::Kind::started ? "cell_started" : "cell_finished";
            line["rw"] = format_duration(e.rw_s);
            line["pw"] = format_duration(e.pw_s);
            if (e.kind == CellEvent::Kind::finished) {
                line["status"] = e.status == CellStatus::ok ? "ok" : "undefined";
                line["elapsed_s"] = e.elapsed_s;
            }
            std::cerr << line.dump() << '\n';
        };
    }

    const auto t0 = std::chrono::steady_clock::now();
    const ResultTable table =
        run_grid(bundle, cfg.rw_s, cfg.pw_s, cfg.hypergrid, cfg.protocol, cfg.seed, jobs, progress);
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    RunContextInfo info;
    info.seed = cfg.seed;
    info.jobs = jobs;
    info.total_seconds = total;
    info.config_echo = cfg.echo;
    emit_results(table, cfg.out_dir, info);

    if (level >= LogLevel::info) {
        json line;
        line["event"] = "run_finished";
        line["cells"] = table.cells.size();
        line["total_s"] = total;
        line["out_dir"] = cfg.out_dir.string();
        std::cerr << line.dump() << '\n';
    }
    return 0;
}

int cmd_report(const std::string& manifest_path, const std::string& out_dir) {
    render_report(manifest_path, out_dir);
    return 0;
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    const SynthConfig cfg = load_synth_config(config_path);
    const SynthOutput out = generate(cfg);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw OutputUnwritable(out_dir);
    const std::filesystem::path dir(out_dir);
    write_telemetry_csv(dir / "telemetry.csv", out.raw);
    write_alerts_csv(dir / "alerts.csv", out.alerts);
    write_ground_truth_json(dir / "ground_truth.json", out.truth, cfg);

    if (log_level() >= LogLevel::info) {
        json line;
        line["event"] = "synth_finished";
        line["rows"] = out.truth.n_rows;
        line["sessions"] = out.truth.session_rows.size();
        line["alerts"] = out.truth.alerts.size();
        line["out_dir"] = out_dir;
        std::cerr << line.dump() << '\n';
    }
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"failure-prediction benchmarking over RW/PW grids"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, out_path;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    bool seed_set = false, jobs_set = false;

    auto* validate = app.add_subcommand("validate", "check config and data files");
    validate->add_option("--config", config_path, "run config JSON")->required();

    auto* sessionize = app.add_subcommand("sessionize", "emit the session map as CSV");
    sessionize->add_option("--config", config_path, "run config JSON")->required();
    sessionize->add_option("--out", out_path, "output CSV path (default: stdout)");

    auto* profile = app.add_subcommand("profile", "emit diversity and spectral entropy");
    profile->add_option("--config", config_path, "run config JSON")->required();

    auto* run = app.add_subcommand("run", "run the full RW/PW grid");
    run->add_option("--config", config_path, "run config JSON")->required();
    run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    run->add_option("--jobs", jobs, "worker threads")->each([&](const std::string&) {
        jobs_set = true;
    });
    run->add_option("--out", out_path, "override the output directory");

    auto* report = app.add_subcommand("report", "re-render reports from a manifest");
    report->add_option("--manifest", manifest_path, "manifest.json path")->required();
    report->add_option("--out", out_path, "output directory")->required();

    auto* synth = app.add_subcommand("synth", "generate a synthetic data set");
    synth->add_option("--config", config_path, "synth config JSON")->required();
    synth->add_option("--out", out_path, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (validate->parsed()) return cmd_validate(config_path);
        if (sessionize->parsed()) return cmd_sessionize(config_path, out_path);
        if (profile->parsed()) return cmd_profile(config_path);
        if (run->parsed()) {
            return cmd_run(config_path, seed_set ? &seed : nullptr, jobs_set ? &jobs : nullptr,
                           out_path);
        }
        if (report->parsed()) return cmd_report(manifest_path, out_path);
        if (synth->parsed()) return cmd_synth(config_path, out_path);
    } catch (const ValidationError& e) {
        std::cerr << json{{"error", "validation"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "runtime"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace failbench
