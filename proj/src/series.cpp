#include "failbench/series.hpp"

#include <algorithm>
#include <cmath>

#include "failbench/errors.hpp"
#include "failbench/fft.hpp"

namespace failbench {

RegularSeries resample_locf(const RawSeries& raw, Seconds period_s, Timestamp span_start,
                            Timestamp span_end) {
    if (period_s <= 0) throw InvalidConfig("resample period must be positive");
    if (span_end < span_start) throw EmptySpan();

    const std::size_t n_vars = raw.n_variables();
    const auto n_rows = static_cast<std::size_t>((span_end - span_start) / period_s) + 1;

    RegularSeries out;
    out.start = span_start;
    out.period_s = period_s;
    out.variables = raw.variables;
    out.rows = n_rows;
    out.values.resize(n_rows * n_vars);

    for (std::size_t v = 0; v < n_vars; ++v) {
        const auto& obs = raw.samples[v];
        // First observation at or before span_start.
        auto it = std::upper_bound(obs.begin(), obs.end(), span_start,
                                   [](Timestamp t, const Sample& s) { return t < s.time; });
        if (it == obs.begin()) throw NoPriorObservation(raw.variables[v]);
        --it;
        for (std::size_t k = 0; k < n_rows; ++k) {
            const Timestamp grid_t = span_start + static_cast<Seconds>(k) * period_s;
            while (std::next(it) != obs.end() && std::next(it)->time <= grid_t) ++it;
            out.at(k, v) = it->value;
        }
    }
    return out;
}

RegularSeries minmax_normalize(const RegularSeries& series) {
    if (series.rows == 0) throw EmptyMatrix("cannot normalize an empty series");
    RegularSeries out = series;
    const std::size_t n_vars = series.n_variables();
    for (std::size_t v = 0; v < n_vars; ++v) {
        double lo = series.at(0, v);
        double hi = lo;
        for (std::size_t k = 1; k < series.rows; ++k) {
            lo = std::min(lo, series.at(k, v));
            hi = std::max(hi, series.at(k, v));
        }
        const double range = hi - lo;
        for (std::size_t k = 0; k < series.rows; ++k) {
            out.at(k, v) = range > 0.0 ? (series.at(k, v) - lo) / range : 0.0;
        }
    }
    return out;
}

double spectral_entropy_signal(const std::vector<double>& signal) {
    if (signal.size() < 8) throw SeriesTooShort("spectral entropy needs at least 8 samples");
    const auto power = power_spectrum_no_dc(signal);

    double total = 0.0;
    for (double p : power) total += p;
    if (total <= 0.0) return 0.0;  // all power at the excluded DC bin

    double entropy = 0.0;
    for (double p : power) {
        if (p <= 0.0) continue;
        const double q = p / total;
        entropy -= q * std::log(q);
    }
    const double max_entropy = std::log(static_cast<double>(power.size()));
    if (max_entropy <= 0.0) return 0.0;
    return std::clamp(entropy / max_entropy, 0.0, 1.0);
}

double spectral_entropy(const RegularSeries& series) {
    if (series.rows < 8) throw SeriesTooShort("spectral entropy needs at least 8 samples per variable");
    const std::size_t n_vars = series.n_variables();
    std::vector<double> signal(series.rows);
    double sum = 0.0;
    for (std::size_t v = 0; v < n_vars; ++v) {
        for (std::size_t k = 0; k < series.rows; ++k) signal[k] = series.at(k, v);
        sum += spectral_entropy_signal(signal);
    }
    return n_vars == 0 ? 0.0 : sum / static_cast<double>(n_vars);
}

double precursor_diversity(const RegularSeries& series, const AlertLog& alerts, Seconds window_s) {
    if (window_s <= 0 || window_s % series.period_s != 0) {
        throw DurationNotMultipleOfPeriod("diversity window must be a positive multiple of the period");
    }
    const auto w = static_cast<std::size_t>(window_s / series.period_s);
    const std::size_t n_vars = series.n_variables();

    // One window of w rows strictly before each alert's grid row.
    std::vector<std::size_t> starts;
    for (const auto& e : alerts.events) {
        const auto row = series.row_of(e.time);
        if (!row) continue;
        if (*row < w) continue;
        starts.push_back(*row - w);
    }
    if (starts.size() < 2) {
        throw InsufficientFaults("precursor diversity needs at least 2 alerts with full history");
    }

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < starts.size(); ++i) {
        for (std::size_t j = i + 1; j < starts.size(); ++j) {
            for (std::size_t k = 0; k < w; ++k) {
                for (std::size_t v = 0; v < n_vars; ++v) {
                    sum += std::abs(series.at(starts[i] + k, v) - series.at(starts[j] + k, v));
                    ++count;
                }
            }
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

RawSeries to_raw(const RegularSeries& series) {
    RawSeries raw;
    raw.variables = series.variables;
    raw.samples.resize(series.n_variables());
    for (std::size_t v = 0; v < series.n_variables(); ++v) {
        raw.samples[v].reserve(series.rows);
        for (std::size_t k = 0; k < series.rows; ++k) {
            raw.samples[v].push_back({series.row_time(k), series.at(k, v)});
        }
    }
    return raw;
}

}  // namespace failbench
