#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <tuple>
#include <vector>

#include "failbench/protocol.hpp"
#include "failbench/series.hpp"
#include "failbench/sessions.hpp"
#include "failbench/synthgen.hpp"

namespace failbench {

// ---- timestamps and durations ------------------------------------------

// ISO-8601 UTC, e.g. 2021-06-15T10:00:00Z. Fractional seconds are floored.
Timestamp parse_iso8601(const std::string& text);
std::string format_iso8601(Timestamp t);

// Duration strings carry an explicit unit ("34s", "15m", "0.25h") and must
// resolve to whole seconds.
Seconds parse_duration(const std::string& text);
std::string format_duration(Seconds s);

// ---- CSV ingestion and emission ------------------------------------------

struct IngestReport {
    std::size_t telemetry_rows = 0;
    std::size_t alert_rows = 0;
    std::size_t duplicate_cells = 0;  // same (timestamp, variable) seen again; last wins
};

// Telemetry is wide CSV (timestamp + one column per variable, blank cell =
// no observation); alerts are (timestamp, code). Timestamps must be
// non-decreasing. When expected_variables is given, the telemetry header
// must match it exactly.
std::tuple<RawSeries, AlertLog, IngestReport> ingest(
    const std::filesystem::path& telemetry_csv, const std::filesystem::path& alerts_csv,
    const std::vector<std::string>* expected_variables = nullptr);

void write_telemetry_csv(const std::filesystem::path& path, const RawSeries& raw);
void write_alerts_csv(const std::filesystem::path& path, const AlertLog& alerts);
void write_sessions_csv(const std::filesystem::path& path, const RegularSeries& series,
                        const SessionMap& sessions);
void write_ground_truth_json(const std::filesystem::path& path, const GroundTruth& truth,
                             const SynthConfig& config);

// ---- run configuration -----------------------------------------------------

struct RunConfig {
    std::filesystem::path telemetry_csv;
    std::filesystem::path alerts_csv;
    Seconds period_s = 0;
    bool whole_dataset_session = false;
    std::vector<std::string> movement_variables;
    Seconds inactivity_gap_s = 600;
    int target_alert_code = 0;
    Seconds profile_window_s = 900;
    std::vector<Seconds> rw_s;
    std::vector<Seconds> pw_s;
    ProtocolConfig protocol;
    HyperGrid hypergrid;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    nlohmann::ordered_json echo;  // normalized config for the manifest
};

// Strict schema: unknown keys anywhere are rejected. Relative paths resolve
// against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::ordered_json& j,
                               const std::filesystem::path& base_dir);

SynthConfig load_synth_config(const std::filesystem::path& path);

// ---- results ---------------------------------------------------------------

nlohmann::ordered_json table_to_json(const ResultTable& table);
ResultTable table_from_json(const nlohmann::ordered_json& j);

struct RunContextInfo {
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    double total_seconds = 0.0;
    nlohmann::ordered_json config_echo;
};

// results.csv, best.csv, heatmap.svg and manifest.json under outdir.
void emit_results(const ResultTable& table, const std::filesystem::path& outdir,
                  const RunContextInfo& info);

// Re-render the three report files from a manifest alone.
void render_report(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& outdir);

std::string results_csv_text(const ResultTable& table);
std::string best_csv_text(const ResultTable& table);
std::string heatmap_svg_text(const ResultTable& table);

}  // namespace failbench
