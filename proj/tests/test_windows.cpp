#include <doctest.h>

#include "failbench/errors.hpp"
#include "failbench/rng.hpp"
#include "failbench/windows.hpp"

using namespace failbench;

namespace {

RegularSeries counting_series(std::size_t rows, std::size_t n_vars, Seconds period = 5) {
    RegularSeries s;
    s.start = {0};
    s.period_s = period;
    s.rows = rows;
    for (std::size_t v = 0; v < n_vars; ++v) s.variables.push_back("v" + std::to_string(v));
    s.values.resize(rows * n_vars);
    for (std::size_t k = 0; k < rows; ++k) {
        for (std::size_t v = 0; v < n_vars; ++v) s.at(k, v) = static_cast<double>(k * n_vars + v);
    }
    return s;
}

// Brute-force enumerator: try every start row in every span, test fit and
// label by scanning the full alert list against the PW rows.
struct BruteWindow {
    int session_id;
    std::size_t start;
    bool failure;
};

std::vector<BruteWindow> brute_force_windows(const RegularSeries& series,
                                             const SessionMap& sessions, const AlertLog& alerts,
                                             const WindowSpec& spec) {
    std::vector<BruteWindow> out;
    for (const auto& span : session_spans(sessions)) {
        for (std::size_t start = span.first_row; start <= span.last_row; ++start) {
            const std::size_t last = start + spec.rw_samples + spec.pw_samples - 1;
            if (last > span.last_row) continue;
            bool failure = false;
            for (std::size_t r = start + spec.rw_samples; r <= last; ++r) {
                const Timestamp lo = series.row_time(r);
                for (const auto& e : alerts.events) {
                    if (e.time >= lo && e.time - lo < series.period_s) failure = true;
                }
            }
            out.push_back({span.session_id, start, failure});
        }
    }
    return out;
}

}  // namespace

TEST_CASE("window counts per session follow the truncation formula") {
    auto series = counting_series(100, 2);
    const auto sessions = whole_dataset_session(series);

    // N - S_RW + 1 raw positions, N - S_RW - S_PW + 1 after PW truncation.
    const auto w4 = extract_windows(series, sessions, {}, {4, 1});
    CHECK(w4.size() == 96);
    const auto w46 = extract_windows(series, sessions, {4, 6});
    CHECK(w46.size() == 91);
}

TEST_CASE("no alerts means every label is no_failure") {
    auto series = counting_series(50, 1);
    const auto windows = extract_windows(series, whole_dataset_session(series), {}, {5, 3});
    CHECK(count_support(windows) == 0);
}

TEST_CASE("alert between grid rows labels the covering PW row") {
    auto series = counting_series(30, 1, 10);
    AlertLog alerts;
    alerts.events = {{{207}, 1}};  // inside row 20's interval [200, 210)
    const auto windows = extract_windows(series, whole_dataset_session(series), alerts, {4, 2});
    for (const auto& w : windows) {
        const std::size_t pw_first = w.start_row + 4;
        const bool covers = pw_first <= 20 && 20 <= pw_first + 1;
        CHECK(w.failure == covers);
    }
    CHECK(count_support(windows) == 2);
}

TEST_CASE("windows never cross session boundaries and match the brute-force oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t rows = 20 + rng.uniform_index(120);
        auto series = counting_series(rows, 1 + rng.uniform_index(3));

        // Random session layout.
        SessionMap sessions;
        sessions.ids.assign(rows, -1);
        int sid = 1;
        std::size_t k = rng.uniform_index(4);
        while (k < rows) {
            const std::size_t len = 1 + rng.uniform_index(30);
            for (std::size_t i = k; i < std::min(rows, k + len); ++i) sessions.ids[i] = sid;
            ++sid;
            k += len + 1 + rng.uniform_index(5);
        }

        AlertLog alerts;
        const std::size_t n_alerts = rng.uniform_index(6);
        for (std::size_t a = 0; a < n_alerts; ++a) {
            alerts.events.push_back(
                {{static_cast<std::int64_t>(rng.uniform_index(rows * 5 + 20))}, 1});
        }
        std::sort(alerts.events.begin(), alerts.events.end(),
                  [](const AlertEvent& x, const AlertEvent& y) { return x.time < y.time; });

        const WindowSpec spec{1 + rng.uniform_index(8), 1 + rng.uniform_index(8)};
        const auto got = extract_windows(series, sessions, alerts, spec);
        const auto want = brute_force_windows(series, sessions, alerts, spec);

        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].session_id == want[i].session_id);
            CHECK(got[i].start_row == want[i].start);
            CHECK(got[i].failure == want[i].failure);
        }

        // Per-span count law.
        for (const auto& span : session_spans(sessions)) {
            const std::size_t n_s = span.length();
            const std::size_t expect =
                n_s >= spec.rw_samples + spec.pw_samples
                    ? n_s - spec.rw_samples - spec.pw_samples + 1
                    : 0;
            std::size_t actual = 0;
            for (const auto& w : got) actual += w.session_id == span.session_id ? 1 : 0;
            CHECK(actual == expect);
        }

        // Windows stay inside one session span.
        for (const auto& w : got) {
            for (std::size_t r = w.span_first(); r <= w.span_last(); ++r) {
                CHECK(sessions.ids[r] == w.session_id);
            }
        }
    }
}

TEST_CASE("features copy the reading-window rows and flatten row-major") {
    auto series = counting_series(20, 3);
    const auto windows = extract_windows(series, whole_dataset_session(series), {}, {2, 1});
    const auto& w = windows[4];
    REQUIRE(w.features.size() == 6);
    for (std::size_t t = 0; t < 2; ++t) {
        for (std::size_t v = 0; v < 3; ++v) {
            CHECK(w.features[t * 3 + v] == series.at(w.start_row + t, v));
        }
    }

    LabeledWindow tiny;
    tiny.rw_samples = 1;
    tiny.n_variables = 1;
    tiny.features = {3.0};
    CHECK(flatten_features(tiny) == std::vector<double>{3.0});

    LabeledWindow two;
    two.rw_samples = 2;
    two.n_variables = 2;
    two.features = {1.0, 2.0, 3.0, 4.0};  // [[a,b],[c,d]] -> [a,b,c,d]
    CHECK(flatten_features(two) == std::vector<double>{1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("duration conversion rejects non-multiples") {
    CHECK(duration_to_samples(600, 5) == 120);
    CHECK_THROWS_AS(duration_to_samples(601, 5), DurationNotMultipleOfPeriod);
    CHECK_THROWS_AS(duration_to_samples(0, 5), DurationNotMultipleOfPeriod);
}

TEST_CASE("support grid is monotone on long sessions") {
    // One alert per session, long sessions: support rises with PW and falls
    // with RW when no window is lost to truncation.
    RegularSeries series = counting_series(600, 1, 60);
    SessionMap sessions;
    sessions.ids.assign(600, -1);
    AlertLog alerts;
    for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t first = s * 200 + 5;
        const std::size_t last = first + 180;
        for (std::size_t k = first; k <= last; ++k) sessions.ids[k] = static_cast<int>(s + 1);
        alerts.events.push_back({{static_cast<std::int64_t>((first + 120) * 60 + 30)}, 1});
    }

    const std::vector<Seconds> rw_list{300, 600, 900};
    const std::vector<Seconds> pw_list{300, 600, 1200, 1800};
    const auto grid = support_grid(series, sessions, alerts, rw_list, pw_list);
    for (std::size_t i = 0; i < rw_list.size(); ++i) {
        for (std::size_t j = 0; j + 1 < pw_list.size(); ++j) {
            CHECK(grid.at(i, j) <= grid.at(i, j + 1));
        }
    }
    for (std::size_t j = 0; j < pw_list.size(); ++j) {
        for (std::size_t i = 0; i + 1 < rw_list.size(); ++i) {
            CHECK(grid.at(i + 1, j) <= grid.at(i, j));
        }
    }
}
