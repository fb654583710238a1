#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace failbench {

// Integer seconds since the Unix epoch, UTC. Sub-second inputs are floored
// at ingestion; none of the supported periods need finer resolution.
struct Timestamp {
    std::int64_t seconds_utc = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
    friend Timestamp operator+(Timestamp t, std::int64_t s) { return {t.seconds_utc + s}; }
    friend Timestamp operator-(Timestamp t, std::int64_t s) { return {t.seconds_utc - s}; }
    // Difference of two timestamps is a duration in seconds.
    friend std::int64_t operator-(Timestamp a, Timestamp b) { return a.seconds_utc - b.seconds_utc; }
};

using Seconds = std::int64_t;

struct Sample {
    Timestamp time;
    double value = 0.0;
};

// Irregularly acquired telemetry: per-variable observation lists with
// strictly increasing timestamps.
struct RawSeries {
    std::vector<std::string> variables;
    std::vector<std::vector<Sample>> samples;  // one list per variable

    std::size_t n_variables() const { return variables.size(); }
};

// Fixed-period multivariate series on a uniform grid. Row k sits at
// start + k * period_s; values are row-major N x V with no missing cells.
struct RegularSeries {
    Timestamp start;
    Seconds period_s = 1;
    std::vector<std::string> variables;
    std::size_t rows = 0;
    std::vector<double> values;  // rows * variables.size(), row-major

    std::size_t n_variables() const { return variables.size(); }
    double at(std::size_t row, std::size_t var) const { return values[row * variables.size() + var]; }
    double& at(std::size_t row, std::size_t var) { return values[row * variables.size() + var]; }
    Timestamp row_time(std::size_t row) const { return start + static_cast<Seconds>(row) * period_s; }

    // Grid row whose interval [t_row, t_row + period) contains t, if any.
    std::optional<std::size_t> row_of(Timestamp t) const {
        if (t < start) return std::nullopt;
        const auto k = static_cast<std::size_t>((t - start) / period_s);
        if (k >= rows) return std::nullopt;
        return k;
    }
};

struct AlertEvent {
    Timestamp time;
    int code = 0;
};

// Machine alert stream: non-decreasing timestamps, non-negative codes.
struct AlertLog {
    std::vector<AlertEvent> events;

    AlertLog filtered(int code) const {
        AlertLog out;
        for (const auto& e : events) {
            if (e.code == code) out.events.push_back(e);
        }
        return out;
    }
};

// Data-set level profile: precursor diversity (pairwise pre-fault window
// distance) and mean normalized spectral entropy, both in [0, 1].
struct DatasetProfile {
    double diversity_m = 0.0;
    double spectral_entropy = 0.0;
    Seconds window_s = 0;
};

// Last-observation-carried-forward resampling onto a uniform grid covering
// [span_start, span_end]. Every variable needs at least one observation at or
// before span_start; throws NoPriorObservation otherwise, EmptySpan when
// span_end < span_start.
RegularSeries resample_locf(const RawSeries& raw, Seconds period_s, Timestamp span_start,
                            Timestamp span_end);

// Per-variable (x - min) / (max - min). Constant variables map to 0.
RegularSeries minmax_normalize(const RegularSeries& series);

// Mean over variables of the Shannon entropy of the normalized FFT power
// spectrum (DC excluded), each divided by log(#retained bins). A degenerate
// spectrum (all power at DC) counts as 0. Requires N >= 8.
double spectral_entropy(const RegularSeries& series);

// Entropy of a single signal; exposed for tests and reuse.
double spectral_entropy_signal(const std::vector<double>& signal);

// Mean pointwise distance between all pairs of pre-fault windows of
// window_s seconds (Eq.-style diversity). The series must be min-max
// normalized so the result lies in [0, 1]. Alerts without a full window of
// in-grid history are skipped; fewer than two usable windows throws
// InsufficientFaults.
double precursor_diversity(const RegularSeries& series, const AlertLog& alerts, Seconds window_s);

// Round a raw series to regular form when it is already on a grid.
RawSeries to_raw(const RegularSeries& series);

}  // namespace failbench
