#pragma once

#include <optional>
#include <string>
#include <vector>

#include "failbench/series.hpp"

namespace failbench {

// Which variables indicate machine movement, and how long without a movement
// increase before a session is considered closed.
struct MovementSpec {
    std::vector<std::string> movement_variables;
    Seconds inactivity_gap_s = 600;
};

// Per-row session ids: -1 out of session, otherwise a counter starting at 1.
// In-session ids form contiguous runs numbered in increasing time order.
struct SessionMap {
    std::vector<int> ids;

    std::size_t size() const { return ids.size(); }
};

struct SessionSpan {
    int session_id = 0;
    std::size_t first_row = 0;
    std::size_t last_row = 0;  // inclusive

    std::size_t length() const { return last_row - first_row + 1; }
    friend bool operator==(const SessionSpan&, const SessionSpan&) = default;
};

// Session boundary computation from movement deltas. A row with any strictly
// positive movement delta opens/extends the current session; once open, rows
// keep the current id until the time since the last increase exceeds the
// inactivity gap. The gap-closing row still carries the old id (the counter
// is incremented after the assignment).
SessionMap compute_sessions(const RegularSeries& series, const MovementSpec& spec);

// Continuous machines: the whole data set is one session.
SessionMap whole_dataset_session(const RegularSeries& series);

// Maximal contiguous in-session runs, in time order.
std::vector<SessionSpan> session_spans(const SessionMap& map);

// Seconds from each in-session row to the next alert in the same session;
// absent when the row is out of session or no later alert exists in it.
std::vector<std::optional<Seconds>> compute_ttf(const RegularSeries& series,
                                                const SessionMap& sessions,
                                                const AlertLog& alerts);

}  // namespace failbench
