#include "failbench/windows.hpp"

#include <algorithm>

#include "failbench/errors.hpp"

namespace failbench {

std::size_t duration_to_samples(Seconds duration_s, Seconds period_s) {
    if (duration_s <= 0 || period_s <= 0 || duration_s % period_s != 0) {
        throw DurationNotMultipleOfPeriod("duration " + std::to_string(duration_s) +
                                          "s is not a positive multiple of the period " +
                                          std::to_string(period_s) + "s");
    }
    return static_cast<std::size_t>(duration_s / period_s);
}

std::vector<LabeledWindow> extract_windows(const RegularSeries& series, const SessionMap& sessions,
                                           const AlertLog& alerts, const WindowSpec& spec) {
    if (sessions.size() != series.rows) throw LengthMismatch("session map does not match the series");
    if (spec.rw_samples < 1 || spec.pw_samples < 1) throw InvalidConfig("window sizes must be >= 1");

    const std::size_t n_vars = series.n_variables();
    const std::size_t rw = spec.rw_samples;
    const std::size_t pw = spec.pw_samples;

    // Alerts are events between grid rows: mark the row whose interval
    // [t_row, t_row + period) contains each one.
    std::vector<char> alert_row(series.rows, 0);
    for (const auto& e : alerts.events) {
        if (const auto row = series.row_of(e.time)) alert_row[*row] = 1;
    }
    // alert_prefix[k] = number of alert rows < k; PW hit tests in O(1).
    std::vector<std::size_t> alert_prefix(series.rows + 1, 0);
    for (std::size_t k = 0; k < series.rows; ++k) {
        alert_prefix[k + 1] = alert_prefix[k] + (alert_row[k] ? 1 : 0);
    }

    std::vector<LabeledWindow> out;
    for (const auto& span : session_spans(sessions)) {
        const std::size_t n_s = span.length();
        if (n_s < rw + pw) continue;
        const std::size_t n_windows = n_s - rw - pw + 1;
        for (std::size_t i = 0; i < n_windows; ++i) {
            const std::size_t start = span.first_row + i;
            const std::size_t pw_first = start + rw;
            const std::size_t pw_last = pw_first + pw - 1;

            LabeledWindow w;
            w.session_id = span.session_id;
            w.start_row = start;
            w.rw_samples = rw;
            w.pw_samples = pw;
            w.n_variables = n_vars;
            w.failure = alert_prefix[pw_last + 1] > alert_prefix[pw_first];
            w.features.assign(series.values.begin() + static_cast<std::ptrdiff_t>(start * n_vars),
                              series.values.begin() + static_cast<std::ptrdiff_t>((start + rw) * n_vars));
            out.push_back(std::move(w));
        }
    }
    return out;
}

std::size_t count_support(const std::vector<LabeledWindow>& windows) {
    return static_cast<std::size_t>(
        std::count_if(windows.begin(), windows.end(), [](const LabeledWindow& w) { return w.failure; }));
}

std::vector<double> flatten_features(const LabeledWindow& window) {
    return window.features;  // stored row-major time x variable already
}

SupportGrid support_grid(const RegularSeries& series, const SessionMap& sessions,
                         const AlertLog& alerts, const std::vector<Seconds>& rw_list,
                         const std::vector<Seconds>& pw_list) {
    SupportGrid grid;
    grid.rw_s = rw_list;
    grid.pw_s = pw_list;
    grid.counts.resize(rw_list.size() * pw_list.size());
    for (std::size_t i = 0; i < rw_list.size(); ++i) {
        for (std::size_t j = 0; j < pw_list.size(); ++j) {
            WindowSpec spec{duration_to_samples(rw_list[i], series.period_s),
                            duration_to_samples(pw_list[j], series.period_s)};
            grid.counts[i * pw_list.size() + j] =
                count_support(extract_windows(series, sessions, alerts, spec));
        }
    }
    return grid;
}

}  // namespace failbench
