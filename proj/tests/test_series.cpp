#include <cmath>
#include <doctest.h>

#include "failbench/errors.hpp"
#include "failbench/rng.hpp"
#include "failbench/series.hpp"

using namespace failbench;

namespace {

RawSeries one_var(std::vector<Sample> samples) {
    RawSeries raw;
    raw.variables = {"v"};
    raw.samples = {std::move(samples)};
    return raw;
}

RegularSeries make_regular(std::vector<std::vector<double>> columns, Seconds period = 5) {
    RegularSeries s;
    s.start = {0};
    s.period_s = period;
    s.rows = columns.front().size();
    for (std::size_t v = 0; v < columns.size(); ++v) s.variables.push_back("v" + std::to_string(v));
    s.values.resize(s.rows * columns.size());
    for (std::size_t k = 0; k < s.rows; ++k) {
        for (std::size_t v = 0; v < columns.size(); ++v) s.at(k, v) = columns[v][k];
    }
    return s;
}

}  // namespace

TEST_CASE("locf carries a single observation across the whole span") {
    const auto out = resample_locf(one_var({{{0}, 2.0}}), 5, {0}, {10});
    REQUIRE(out.rows == 3);
    CHECK(out.at(0, 0) == 2.0);
    CHECK(out.at(1, 0) == 2.0);
    CHECK(out.at(2, 0) == 2.0);
}

TEST_CASE("locf ignores observations past the last grid point") {
    // samples 0 -> 2 and 12 -> 5; grid 0,5,10 never sees the late sample
    const auto out = resample_locf(one_var({{{0}, 2.0}, {{12}, 5.0}}), 5, {0}, {14});
    REQUIRE(out.rows == 3);
    CHECK(out.at(0, 0) == 2.0);
    CHECK(out.at(1, 0) == 2.0);
    CHECK(out.at(2, 0) == 2.0);
}

TEST_CASE("locf picks the latest observation at or before each grid point") {
    const auto out = resample_locf(one_var({{{0}, 1.0}, {{5}, 2.0}, {{7}, 3.0}}), 5, {0}, {10});
    REQUIRE(out.rows == 3);
    CHECK(out.at(0, 0) == 1.0);
    CHECK(out.at(1, 0) == 2.0);
    CHECK(out.at(2, 0) == 3.0);
}

TEST_CASE("locf errors") {
    CHECK_THROWS_AS(resample_locf(one_var({{{10}, 1.0}}), 5, {0}, {20}), NoPriorObservation);
    CHECK_THROWS_AS(resample_locf(one_var({{{0}, 1.0}}), 5, {10}, {0}), EmptySpan);
}

TEST_CASE("locf is idempotent on an already-regular series and never invents values") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        RawSeries raw;
        raw.variables = {"a", "b"};
        raw.samples.resize(2);
        for (auto& samples : raw.samples) {
            Seconds t = static_cast<Seconds>(rng.uniform_index(5));
            const std::size_t n = 3 + rng.uniform_index(20);
            for (std::size_t i = 0; i < n; ++i) {
                samples.push_back({{t}, std::floor(rng.uniform(-5.0, 5.0) * 4.0) / 4.0});
                t += 1 + static_cast<Seconds>(rng.uniform_index(9));
            }
        }
        const Timestamp start{static_cast<std::int64_t>(
            std::max(raw.samples[0].front().time.seconds_utc,
                     raw.samples[1].front().time.seconds_utc))};
        const Timestamp end = start + 60;
        const auto grid = resample_locf(raw, 3, start, end);

        // Idempotence: re-resampling the regular series at its own period.
        const auto again = resample_locf(to_raw(grid), grid.period_s, grid.start,
                                         grid.row_time(grid.rows - 1));
        REQUIRE(again.rows == grid.rows);
        CHECK(again.values == grid.values);

        // Every output cell is one of the input observations of the variable.
        for (std::size_t v = 0; v < 2; ++v) {
            for (std::size_t k = 0; k < grid.rows; ++k) {
                bool found = false;
                for (const auto& s : raw.samples[v]) found = found || s.value == grid.at(k, v);
                CHECK(found);
            }
        }
    }
}

TEST_CASE("minmax normalization maps ranges to [0,1]") {
    const auto out = minmax_normalize(make_regular({{10.0, 20.0, 30.0}}));
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(1, 0) == 0.5);
    CHECK(out.at(2, 0) == 1.0);

    const auto binary = minmax_normalize(make_regular({{0.0, 1.0, 1.0, 0.0}}));
    CHECK(binary.at(0, 0) == 0.0);
    CHECK(binary.at(1, 0) == 1.0);

    const auto constant = minmax_normalize(make_regular({{7.0, 7.0, 7.0}}));
    for (std::size_t k = 0; k < 3; ++k) CHECK(constant.at(k, 0) == 0.0);
}

TEST_CASE("minmax normalization is idempotent and stays in bounds") {
    Rng rng(3);
    std::vector<std::vector<double>> cols(3);
    for (auto& col : cols) {
        for (int i = 0; i < 40; ++i) col.push_back(rng.uniform(-100.0, 50.0));
    }
    const auto once = minmax_normalize(make_regular(cols));
    for (double v : once.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const auto twice = minmax_normalize(once);
    for (std::size_t i = 0; i < once.values.size(); ++i) {
        CHECK(twice.values[i] == doctest::Approx(once.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("spectral entropy separates noise, tones and constants") {
    const std::size_t n = 4096;
    Rng rng(123);
    std::vector<double> noise(n), tone(n), flat(n, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        noise[i] = rng.normal();
        tone[i] = std::sin(2.0 * M_PI * 64.0 * static_cast<double>(i) / static_cast<double>(n));
    }
    CHECK(spectral_entropy_signal(noise) >= 0.85);
    CHECK(spectral_entropy_signal(tone) <= 0.2);
    CHECK(spectral_entropy_signal(flat) == 0.0);

    CHECK_THROWS_AS(spectral_entropy_signal({1, 2, 3}), SeriesTooShort);
}

TEST_CASE("spectral entropy is invariant under amplitude scaling") {
    Rng rng(5);
    std::vector<double> x(512);
    for (auto& v : x) v = rng.normal() + std::sin(0.3 * static_cast<double>(&v - x.data()));
    const double base = spectral_entropy_signal(x);
    for (double scale : {0.01, 3.0, 1000.0}) {
        auto scaled = x;
        for (auto& v : scaled) v *= scale;
        CHECK(spectral_entropy_signal(scaled) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("series-level entropy averages per-variable entropies") {
    const std::size_t n = 64;
    std::vector<double> tone(n), flat(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        tone[i] = std::sin(2.0 * M_PI * 4.0 * static_cast<double>(i) / static_cast<double>(n));
    }
    const auto series = make_regular({tone, flat});
    const double expect = 0.5 * spectral_entropy_signal(tone);
    CHECK(spectral_entropy(series) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("precursor diversity hand cases") {
    // Window of 2 samples before each alert; period 5.
    // w1 = [0, 1], w2 = [1, 1] -> mean(|0-1|, |1-1|) = 0.5
    const auto series = make_regular({{0.0, 1.0, 0.5, 1.0, 1.0, 0.5}});
    AlertLog alerts;
    alerts.events = {{{10}, 1}, {{25}, 1}};
    CHECK(precursor_diversity(series, alerts, 10) == doctest::Approx(0.5).epsilon(1e-12));

    // Identical windows -> 0.
    const auto series2 = make_regular({{0.25, 0.75, 0.25, 0.75, 0.0, 0.0}});
    AlertLog alerts2;
    alerts2.events = {{{10}, 1}, {{20}, 1}};
    CHECK(precursor_diversity(series2, alerts2, 10) == 0.0);
}

TEST_CASE("precursor diversity needs two usable windows") {
    const auto series = make_regular({{0.0, 1.0, 0.5, 1.0}});
    AlertLog one;
    one.events = {{{10}, 1}};
    CHECK_THROWS_AS(precursor_diversity(series, one, 10), InsufficientFaults);

    AlertLog no_history;  // second alert has no full window before it
    no_history.events = {{{5}, 1}, {{10}, 1}};
    CHECK_THROWS_AS(precursor_diversity(series, no_history, 10), InsufficientFaults);
}

TEST_CASE("precursor diversity is symmetric and affine-invariant through normalization") {
    Rng rng(17);
    std::vector<std::vector<double>> cols(2);
    for (auto& col : cols) {
        for (int i = 0; i < 200; ++i) col.push_back(rng.uniform(0.0, 1.0));
    }
    auto series = make_regular(cols);
    AlertLog alerts;
    alerts.events = {{{100}, 1}, {{400}, 1}, {{800}, 1}};
    AlertLog reversed;
    reversed.events = {{{800}, 1}, {{400}, 1}, {{100}, 1}};
    // Order of faults cannot matter (unordered pairs).
    const double base = precursor_diversity(series, alerts, 50);
    std::sort(reversed.events.begin(), reversed.events.end(),
              [](const AlertEvent& a, const AlertEvent& b) { return a.time < b.time; });
    CHECK(precursor_diversity(series, reversed, 50) == doctest::Approx(base).epsilon(1e-12));

    // Positive affine rescaling disappears after min-max normalization.
    auto rescaled = series;
    for (std::size_t k = 0; k < rescaled.rows; ++k) {
        rescaled.at(k, 0) = 3.0 * rescaled.at(k, 0) + 11.0;
        rescaled.at(k, 1) = 0.25 * rescaled.at(k, 1) - 2.0;
    }
    const double again =
        precursor_diversity(minmax_normalize(rescaled), alerts, 50);
    const double norm_base = precursor_diversity(minmax_normalize(series), alerts, 50);
    CHECK(again == doctest::Approx(norm_base).epsilon(1e-12));
}
