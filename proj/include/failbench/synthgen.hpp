#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "failbench/series.hpp"
#include "failbench/windows.hpp"

namespace failbench {

// Session-structured telemetry with planted fault precursors. Movement
// variables are exactly zero between sessions, so session ground truth is
// unambiguous; each fault is preceded by a motif drawn from a small bank of
// smooth bumps/ramps/oscillations whose spread the diversity knob controls.
struct SynthConfig {
    std::size_t n_variables = 5;
    std::size_t n_movement = 2;  // leading variables carry movement
    std::size_t n_sessions = 30;
    std::size_t session_min_rows = 300;
    std::size_t session_max_rows = 600;
    Seconds period_s = 60;
    Seconds gap_s = 1200;  // idle stretch between sessions, > 600 + 2 periods
    double fault_rate = 0.5;  // per-session fault probability
    Seconds lead_time_s = 900;
    double diversity_knob = 0.5;  // 0 = one motif, 1 = full bank + jitter
    double noise_sigma = 0.05;
    double sample_dropout = 0.1;  // raw-sample thinning on non-movement variables
    int alert_code = 11;
    std::uint64_t seed = 1;

    // Order-sensitive task parameters.
    bool order_sensitive = false;
    std::size_t order_window_rows = 24;
    std::size_t n_order_windows = 800;
};

struct PlantedAlert {
    Timestamp time;
    std::size_t motif_id = 0;
    std::size_t session_index = 0;
};

struct GroundTruth {
    std::vector<PlantedAlert> alerts;
    std::vector<std::pair<std::size_t, std::size_t>> session_rows;  // inclusive grid rows
    std::size_t n_rows = 0;
    Timestamp start;
};

struct SynthOutput {
    RawSeries raw;
    AlertLog alerts;
    GroundTruth truth;
};

std::size_t motif_bank_size();

// Deterministic per seed. Raw samples are change-driven and thinned so the
// acquisition is irregular and LOCF resampling is actually exercised.
SynthOutput generate(const SynthConfig& config);

// Windows whose label depends only on whether motif A precedes motif B; the
// paired block placement keeps per-timestep marginals identical across
// classes, so position-wise models see no usable signal.
std::vector<LabeledWindow> order_sensitive_task(const SynthConfig& config);

// Single window of the order task; swapping a_first flips the label and
// nothing else.
LabeledWindow order_sensitive_window(const SynthConfig& config, bool a_first, std::size_t offset,
                                     std::uint64_t noise_seed);

// Valid offset range for the motif block, [lo, hi] inclusive.
std::pair<std::size_t, std::size_t> order_offset_range(const SynthConfig& config);

}  // namespace failbench
