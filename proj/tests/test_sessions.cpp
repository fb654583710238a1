#include <doctest.h>
#include <map>

#include "failbench/errors.hpp"
#include "failbench/rng.hpp"
#include "failbench/sessions.hpp"

using namespace failbench;

namespace {

RegularSeries movement_series(const std::vector<std::vector<double>>& columns, Seconds period,
                              Timestamp start = {0}) {
    RegularSeries s;
    s.start = start;
    s.period_s = period;
    s.rows = columns.front().size();
    for (std::size_t v = 0; v < columns.size(); ++v) s.variables.push_back("mv" + std::to_string(v));
    s.values.resize(s.rows * columns.size());
    for (std::size_t k = 0; k < s.rows; ++k) {
        for (std::size_t v = 0; v < columns.size(); ++v) s.at(k, v) = columns[v][k];
    }
    return s;
}

MovementSpec all_movement(const RegularSeries& s, Seconds gap = 600) {
    return {s.variables, gap};
}

// Literal transcription of the session-boundary pseudocode over a timestamp
// map, kept independent of the library implementation on purpose.
std::map<std::int64_t, int> pseudocode_sessions(const RegularSeries& series, Seconds gap) {
    std::map<std::int64_t, std::vector<double>> ds;
    for (std::size_t k = 0; k < series.rows; ++k) {
        std::vector<double> mv(series.n_variables());
        for (std::size_t v = 0; v < series.n_variables(); ++v) mv[v] = series.at(k, v);
        ds[series.row_time(k).seconds_utc] = mv;
    }

    std::int64_t latest = 0;
    bool has_latest = false;
    bool flag = false;
    std::map<std::int64_t, int> sessions;
    int counter = 1;
    const std::int64_t ts_min = ds.begin()->first;

    for (const auto& [ts, mv] : ds) {
        sessions[ts] = -1;
        if (ts != ts_min) {
            const auto prev = std::prev(ds.find(ts));
            bool any = false;
            for (std::size_t e = 0; e < mv.size(); ++e) {
                if (mv[e] - prev->second[e] > 0.0) any = true;
            }
            if (any) {
                latest = ts;
                has_latest = true;
                flag = true;
                sessions[ts] = counter;
            } else if (flag) {
                sessions[ts] = counter;
                if (has_latest && ts - latest > gap) {
                    ++counter;
                    flag = false;
                }
            }
        } else {
            latest = ts;
            has_latest = true;
        }
    }
    return sessions;
}

}  // namespace

TEST_CASE("constant movement never opens a session") {
    const auto s = movement_series({std::vector<double>(30, 0.0)}, 60);
    const auto map = compute_sessions(s, all_movement(s));
    for (int id : map.ids) CHECK(id == -1);
}

TEST_CASE("gap-closing row still carries the old session id") {
    // 1-minute period; positive delta only at row 1; 10-minute gap.
    std::vector<double> mv(30, 0.0);
    mv[1] = 5.0;
    mv[2] = 5.0;
    const auto s = movement_series({mv}, 60);
    const auto map = compute_sessions(s, all_movement(s));

    // latest = t1; rows 1..12 carry session 1 and row 12 (ts - latest = 660s)
    // is the gap-closing row.
    CHECK(map.ids[0] == -1);
    for (std::size_t k = 1; k <= 12; ++k) CHECK(map.ids[k] == 1);
    for (std::size_t k = 13; k < 30; ++k) CHECK(map.ids[k] == -1);
}

TEST_CASE("two activity bursts separated by a long idle stretch give two sessions") {
    std::vector<double> mv(80, 0.0);
    mv[2] = 1.0;  // burst 1
    mv[3] = 2.0;
    mv[40] = 1.0;  // burst 2, 30+ minutes later at 1-minute period
    mv[41] = 2.0;
    const auto s = movement_series({mv}, 60);
    const auto spans = session_spans(compute_sessions(s, all_movement(s)));
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].session_id == 1);
    CHECK(spans[1].session_id == 2);
    CHECK(spans[0].first_row == 2);
    CHECK(spans[1].first_row == 40);
}

TEST_CASE("unknown movement variable") {
    const auto s = movement_series({{0.0, 1.0}}, 60);
    CHECK_THROWS_AS(compute_sessions(s, {{"nope"}, 600}), UnknownMovementVariable);
}

TEST_CASE("whole dataset session") {
    const auto one = movement_series({{1.0}}, 60);
    CHECK(whole_dataset_session(one).ids == std::vector<int>{1});

    const auto s = movement_series({std::vector<double>(100, 0.0)}, 60);
    const auto map = whole_dataset_session(s);
    CHECK(map.ids == std::vector<int>(100, 1));
    const auto spans = session_spans(map);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].first_row == 0);
    CHECK(spans[0].last_row == 99);
}

TEST_CASE("session spans are maximal runs") {
    CHECK(session_spans({{-1, 1, 1, -1}}) ==
          std::vector<SessionSpan>{{1, 1, 2}});
    CHECK(session_spans({{-1, -1, -1}}).empty());
    CHECK(session_spans({{-1, 1, 1, 1, -1, -1, 2, 2}}) ==
          std::vector<SessionSpan>{{1, 1, 3}, {2, 6, 7}});
}

TEST_CASE("sessionizer matches the literal pseudocode on random traces") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n_vars = 1 + rng.uniform_index(3);
        const std::size_t rows = 5 + rng.uniform_index(60);
        const Seconds period = 30 + static_cast<Seconds>(rng.uniform_index(120));
        const Seconds gap = 120 + static_cast<Seconds>(rng.uniform_index(900));

        std::vector<std::vector<double>> cols(n_vars, std::vector<double>(rows));
        for (auto& col : cols) {
            for (auto& v : col) {
                // Values repeat often so deltas hit zero, positive and negative.
                v = static_cast<double>(rng.uniform_index(4));
            }
        }
        const auto s = movement_series(cols, period);
        const auto got = compute_sessions(s, {s.variables, gap});
        const auto want = pseudocode_sessions(s, gap);
        REQUIRE(got.ids.size() == rows);
        for (std::size_t k = 0; k < rows; ++k) {
            CHECK(got.ids[k] == want.at(s.row_time(k).seconds_utc));
        }
    }
}

TEST_CASE("session ids increase across spans and shifting time changes nothing") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t rows = 20 + rng.uniform_index(60);
        std::vector<double> col(rows);
        for (auto& v : col) v = static_cast<double>(rng.uniform_index(3));
        const auto s = movement_series({col}, 120);
        const auto spans = session_spans(compute_sessions(s, all_movement(s)));
        for (std::size_t i = 1; i < spans.size(); ++i) {
            CHECK(spans[i].session_id > spans[i - 1].session_id);
        }

        const auto shifted = movement_series({col}, 120, {98765});
        CHECK(compute_sessions(shifted, all_movement(shifted)).ids ==
              compute_sessions(s, all_movement(s)).ids);
    }
}

TEST_CASE("infinite gap keeps one session open after the first increase") {
    Rng rng(8);
    std::vector<double> col(200);
    for (auto& v : col) v = static_cast<double>(rng.uniform_index(3));
    col[5] = 9.0;  // guarantee at least one increase
    const auto s = movement_series({col}, 60);
    const auto map = compute_sessions(s, {s.variables, std::numeric_limits<Seconds>::max() / 2});
    const auto spans = session_spans(map);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].last_row == 199);
}

TEST_CASE("time to failure hand cases") {
    // Session rows t = 0..50 at period 5, alert at t = 30.
    RegularSeries s = movement_series({std::vector<double>(11, 0.0)}, 5);
    SessionMap sessions;
    sessions.ids.assign(11, 1);
    AlertLog alerts;
    alerts.events = {{{30}, 1}};
    const auto ttf = compute_ttf(s, sessions, alerts);
    REQUIRE(ttf[2].has_value());
    CHECK(*ttf[2] == 20);  // t = 10
    CHECK(*ttf[0] == 30);
    CHECK(*ttf[6] == 0);  // alert at the row's own timestamp
    for (std::size_t k = 7; k < 11; ++k) CHECK(!ttf[k].has_value());

    // No alert in the session: all rows absent.
    const auto none = compute_ttf(s, sessions, {});
    for (const auto& v : none) CHECK(!v.has_value());
}

TEST_CASE("ttf decreases by exactly the period between consecutive alerts") {
    RegularSeries s = movement_series({std::vector<double>(40, 0.0)}, 7);
    SessionMap sessions;
    sessions.ids.assign(40, -1);
    for (std::size_t k = 3; k <= 30; ++k) sessions.ids[k] = 1;
    AlertLog alerts;
    alerts.events = {{{7 * 10 + 3}, 1}, {{7 * 25}, 1}};
    const auto ttf = compute_ttf(s, sessions, alerts);
    for (std::size_t k = 3; k <= 30; ++k) {
        if (!ttf[k].has_value() || !ttf[k + 1].has_value()) continue;
        if (*ttf[k] == 0) continue;  // alert row resets the distance
        if (*ttf[k + 1] > *ttf[k]) continue;  // crossed an alert boundary
        CHECK(*ttf[k] - *ttf[k + 1] == 7);
    }
    for (std::size_t k = 0; k < 3; ++k) CHECK(!ttf[k].has_value());
}
