#include "failbench/sessions.hpp"

#include <algorithm>

#include "failbench/errors.hpp"

namespace failbench {

SessionMap compute_sessions(const RegularSeries& series, const MovementSpec& spec) {
    if (spec.movement_variables.empty()) throw InvalidConfig("movement variable list is empty");
    if (spec.inactivity_gap_s <= 0) throw InvalidConfig("inactivity gap must be positive");

    std::vector<std::size_t> mv_cols;
    mv_cols.reserve(spec.movement_variables.size());
    for (const auto& name : spec.movement_variables) {
        const auto it = std::find(series.variables.begin(), series.variables.end(), name);
        if (it == series.variables.end()) throw UnknownMovementVariable(name);
        mv_cols.push_back(static_cast<std::size_t>(it - series.variables.begin()));
    }

    SessionMap map;
    map.ids.assign(series.rows, -1);
    if (series.rows == 0) return map;

    Timestamp latest = series.row_time(0);
    bool in_session = false;
    int counter = 1;

    for (std::size_t k = 1; k < series.rows; ++k) {
        const Timestamp ts = series.row_time(k);
        bool any_increase = false;
        for (std::size_t c : mv_cols) {
            if (series.at(k, c) - series.at(k - 1, c) > 0.0) {
                any_increase = true;
                break;
            }
        }
        if (any_increase) {
            latest = ts;
            in_session = true;
            map.ids[k] = counter;
        } else if (in_session) {
            map.ids[k] = counter;
            if (ts - latest > spec.inactivity_gap_s) {
                ++counter;
                in_session = false;
            }
        }
    }
    return map;
}

SessionMap whole_dataset_session(const RegularSeries& series) {
    if (series.rows == 0) throw EmptyMatrix("cannot sessionize an empty series");
    SessionMap map;
    map.ids.assign(series.rows, 1);
    return map;
}

std::vector<SessionSpan> session_spans(const SessionMap& map) {
    std::vector<SessionSpan> spans;
    const std::size_t n = map.ids.size();
    std::size_t k = 0;
    while (k < n) {
        if (map.ids[k] < 1) {
            ++k;
            continue;
        }
        const int id = map.ids[k];
        const std::size_t first = k;
        while (k + 1 < n && map.ids[k + 1] == id) ++k;
        spans.push_back({id, first, k});
        ++k;
    }
    return spans;
}

std::vector<std::optional<Seconds>> compute_ttf(const RegularSeries& series,
                                                const SessionMap& sessions,
                                                const AlertLog& alerts) {
    if (sessions.size() != series.rows) throw LengthMismatch("session map does not match the series");

    std::vector<std::optional<Seconds>> ttf(series.rows);
    const auto spans = session_spans(sessions);

    for (const auto& span : spans) {
        // Alert times that land on a grid row of this span, ascending.
        std::vector<Timestamp> in_span;
        for (const auto& e : alerts.events) {
            const auto row = series.row_of(e.time);
            if (row && *row >= span.first_row && *row <= span.last_row) in_span.push_back(e.time);
        }
        if (in_span.empty()) continue;
        for (std::size_t k = span.first_row; k <= span.last_row; ++k) {
            const Timestamp t = series.row_time(k);
            const auto it = std::lower_bound(in_span.begin(), in_span.end(), t);
            if (it != in_span.end()) ttf[k] = *it - t;
        }
    }
    return ttf;
}

}  // namespace failbench
