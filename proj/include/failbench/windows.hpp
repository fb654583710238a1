#pragma once

#include <cstdint>
#include <vector>

#include "failbench/series.hpp"
#include "failbench/sessions.hpp"

namespace failbench {

// Window sizes in grid samples; stride is fixed at 1.
struct WindowSpec {
    std::size_t rw_samples = 1;
    std::size_t pw_samples = 1;
};

// Convert a duration to a sample count; throws DurationNotMultipleOfPeriod.
std::size_t duration_to_samples(Seconds duration_s, Seconds period_s);

// One reading window plus its prediction-window label. Features are the
// series rows [start_row, start_row + rw_samples - 1], row-major time x
// variable.
struct LabeledWindow {
    int session_id = 0;
    std::size_t start_row = 0;
    std::size_t rw_samples = 0;
    std::size_t pw_samples = 0;
    std::size_t n_variables = 0;
    bool failure = false;
    std::vector<double> features;

    // Full extent (RW plus PW), inclusive rows; what overlap exclusion uses.
    std::size_t span_first() const { return start_row; }
    std::size_t span_last() const { return start_row + rw_samples + pw_samples - 1; }
};

// Slide over every session span and emit windows whose RW and PW both fit
// inside the span: max(0, N_s - S_RW - S_PW + 1) per span. A window is
// failure-labeled iff some alert timestamp falls on a PW row's grid interval
// [t_row, t_row + period). Callers filter the alert log to the target code.
std::vector<LabeledWindow> extract_windows(const RegularSeries& series, const SessionMap& sessions,
                                           const AlertLog& alerts, const WindowSpec& spec);

// Number of failure-labeled windows.
std::size_t count_support(const std::vector<LabeledWindow>& windows);

// Row-major flattening, time-major then variable order.
std::vector<double> flatten_features(const LabeledWindow& window);

// Failure support for every (rw, pw) pair, same layout as the result grid.
struct SupportGrid {
    std::vector<Seconds> rw_s;
    std::vector<Seconds> pw_s;
    std::vector<std::size_t> counts;  // rw-major: counts[i * pw_s.size() + j]

    std::size_t at(std::size_t rw_idx, std::size_t pw_idx) const {
        return counts[rw_idx * pw_s.size() + pw_idx];
    }
};

SupportGrid support_grid(const RegularSeries& series, const SessionMap& sessions,
                         const AlertLog& alerts, const std::vector<Seconds>& rw_list,
                         const std::vector<Seconds>& pw_list);

}  // namespace failbench
