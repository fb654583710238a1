#include "failbench/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "failbench/errors.hpp"
#include "failbench/rng.hpp"

namespace failbench {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::size_t kMotifBank = 4;

void validate(const SynthConfig& c) {
    if (c.n_variables < 2 || c.n_movement < 1 || c.n_movement >= c.n_variables) {
        throw InvalidConfig("need at least one movement and one telemetry variable");
    }
    if (c.n_sessions < 1) throw InvalidConfig("need at least one session");
    if (c.session_min_rows < 4 || c.session_min_rows > c.session_max_rows) {
        throw InvalidConfig("bad session length range");
    }
    if (c.period_s <= 0) throw InvalidConfig("period must be positive");
    if (c.gap_s <= 600 + 2 * c.period_s) {
        throw InvalidConfig("session gap must exceed the 10-minute inactivity rule with margin");
    }
    if (c.lead_time_s <= 0 || c.lead_time_s % c.period_s != 0) {
        throw InvalidConfig("lead time must be a positive multiple of the period");
    }
    const auto lead_rows = static_cast<std::size_t>(c.lead_time_s / c.period_s);
    if (lead_rows >= c.session_min_rows) {
        throw InvalidConfig("lead time must be shorter than the shortest session");
    }
    if (c.fault_rate < 0.0 || c.fault_rate > 1.0) throw InvalidConfig("fault_rate must be in [0,1]");
    if (c.diversity_knob < 0.0 || c.diversity_knob > 1.0) {
        throw InvalidConfig("diversity_knob must be in [0,1]");
    }
    if (c.noise_sigma < 0.0 || c.sample_dropout < 0.0 || c.sample_dropout >= 1.0) {
        throw InvalidConfig("bad noise/dropout settings");
    }
}

// Additive precursor shape at offset k of lead window length L, in [0, L).
double motif_value(std::size_t motif, std::size_t k, std::size_t len) {
    const double t = static_cast<double>(k) / static_cast<double>(len);
    switch (motif % kMotifBank) {
        case 0: return -0.8 * t;  // slow tension-style drop into the fault
        case 1: {                 // power-style spike late in the window
            const double z = (t - 0.75) / 0.12;
            return 0.9 * std::exp(-z * z);
        }
        case 2: return -0.7 / (1.0 + std::exp(-(t - 0.5) / 0.08));  // pressure step down
        default: return 0.5 * t * std::sin(2.0 * kPi * t * 6.0);    // growing oscillation
    }
}

}  // namespace

std::size_t motif_bank_size() { return kMotifBank; }

SynthOutput generate(const SynthConfig& config) {
    validate(config);
    const std::size_t n_vars = config.n_variables;
    const std::size_t n_mov = config.n_movement;
    const auto gap_rows = static_cast<std::size_t>(config.gap_s / config.period_s);
    const auto lead_rows = static_cast<std::size_t>(config.lead_time_s / config.period_s);

    Rng rng(mix_seed(config.seed, "synth"));

    // Row layout: a leading idle gap, then session/gap pairs.
    std::vector<std::pair<std::size_t, std::size_t>> session_rows;
    std::size_t row = gap_rows;
    for (std::size_t s = 0; s < config.n_sessions; ++s) {
        const auto len = config.session_min_rows +
                         static_cast<std::size_t>(rng.uniform_index(
                             config.session_max_rows - config.session_min_rows + 1));
        session_rows.emplace_back(row, row + len - 1);
        row += len + gap_rows;
    }
    const std::size_t n_rows = row;
    const Timestamp start{1622505600};  // fixed origin; shifting it is immaterial

    // Ideal values on the grid.
    std::vector<double> values(n_rows * n_vars, 0.0);
    auto at = [&](std::size_t r, std::size_t v) -> double& { return values[r * n_vars + v]; };

    for (std::size_t v = n_mov; v < n_vars; ++v) {
        const double phase = 2.0 * kPi * static_cast<double>(v) / static_cast<double>(n_vars);
        for (std::size_t r = 0; r < n_rows; ++r) {
            at(r, v) = 0.5 + 0.15 * std::sin(2.0 * kPi * static_cast<double>(r) / 97.0 + phase) +
                       config.noise_sigma * rng.normal();
        }
    }

    for (std::size_t s = 0; s < session_rows.size(); ++s) {
        const auto [a, b] = session_rows[s];
        for (std::size_t v = 0; v < n_mov; ++v) {
            const double phase = 0.9 * static_cast<double>(v);
            for (std::size_t r = a; r <= b; ++r) {
                at(r, v) = 1.0 + 0.4 * std::sin(2.0 * kPi * static_cast<double>(r - a) / 7.0 + phase);
            }
            // A movement increase on the last row pins the session end for
            // the boundary algorithm.
            at(b, v) = at(b - 1, v) + 0.1;
        }
    }

    // Faults and their precursor motifs.
    GroundTruth truth;
    truth.session_rows = session_rows;
    truth.n_rows = n_rows;
    truth.start = start;
    AlertLog alerts;
    for (std::size_t s = 0; s < session_rows.size(); ++s) {
        const auto [a, b] = session_rows[s];
        if (rng.uniform() >= config.fault_rate) continue;
        const std::size_t fault_row =
            a + lead_rows + static_cast<std::size_t>(rng.uniform_index(b - a - lead_rows + 1));

        std::size_t motif = 0;
        if (config.diversity_knob > 0.0 && rng.uniform() < config.diversity_knob) {
            motif = static_cast<std::size_t>(rng.uniform_index(kMotifBank));
        }
        const double amp = 1.0 + config.diversity_knob * rng.uniform(-0.4, 0.4);
        const std::size_t target_var = n_mov + motif % (n_vars - n_mov);
        for (std::size_t k = 0; k < lead_rows; ++k) {
            at(fault_row - lead_rows + k, target_var) += amp * motif_value(motif, k, lead_rows);
        }

        const Timestamp t_alert = start + static_cast<Seconds>(fault_row) * config.period_s +
                                  config.period_s / 2;
        alerts.events.push_back({t_alert, config.alert_code});
        truth.alerts.push_back({t_alert, motif, s});
    }

    // Raw emission. Movement variables transmit exactly on change so the
    // LOCF grid reproduces them bit-for-bit; telemetry variables are thinned
    // and jittered to keep the acquisition irregular.
    RawSeries raw;
    raw.variables.reserve(n_vars);
    for (std::size_t v = 0; v < n_mov; ++v) raw.variables.push_back("mov_" + std::to_string(v));
    for (std::size_t v = n_mov; v < n_vars; ++v) raw.variables.push_back("sig_" + std::to_string(v - n_mov));
    raw.samples.resize(n_vars);

    const auto max_jitter = static_cast<std::uint64_t>(std::max<Seconds>(1, config.period_s / 3));
    for (std::size_t v = 0; v < n_vars; ++v) {
        auto& samples = raw.samples[v];
        samples.push_back({start, at(0, v)});
        for (std::size_t r = 1; r < n_rows; ++r) {
            const Timestamp grid_t = start + static_cast<Seconds>(r) * config.period_s;
            if (v < n_mov) {
                if (at(r, v) != at(r - 1, v)) samples.push_back({grid_t, at(r, v)});
            } else {
                if (rng.uniform() < config.sample_dropout) continue;
                const auto jitter = static_cast<Seconds>(rng.uniform_index(max_jitter));
                samples.push_back({grid_t + jitter, at(r, v)});
            }
        }
    }

    return {std::move(raw), std::move(alerts), std::move(truth)};
}

std::pair<std::size_t, std::size_t> order_offset_range(const SynthConfig& config) {
    const std::size_t s = config.order_window_rows;
    const std::size_t motif_len = std::max<std::size_t>(2, s / 4);
    if (s < 2 * motif_len + 4) throw InvalidConfig("order window too short for the motif pair");
    return {1, s - 2 * motif_len - 1};
}

LabeledWindow order_sensitive_window(const SynthConfig& config, bool a_first, std::size_t offset,
                                     std::uint64_t noise_seed) {
    const std::size_t s = config.order_window_rows;
    const std::size_t motif_len = std::max<std::size_t>(2, s / 4);
    const auto [lo, hi] = order_offset_range(config);
    if (offset < lo || offset > hi) throw InvalidConfig("order motif offset out of range");

    Rng rng(mix_seed(noise_seed, "order-window"));
    LabeledWindow w;
    w.session_id = 1;
    w.rw_samples = s;
    w.pw_samples = 1;
    w.n_variables = config.n_variables;
    w.failure = a_first;
    w.features.assign(s * config.n_variables, 0.0);

    for (std::size_t t = 0; t < s; ++t) {
        for (std::size_t v = 0; v < config.n_variables; ++v) {
            w.features[t * config.n_variables + v] = config.noise_sigma * rng.normal();
        }
    }
    // Adjacent motif pair at a uniform offset: the up-down arch and its
    // mirror image. Values over the block form the same multiset either way,
    // so per-timestep marginals cannot reveal the order.
    for (std::size_t k = 0; k < motif_len; ++k) {
        const double arch = std::sin(2.0 * kPi * static_cast<double>(k) / static_cast<double>(motif_len));
        const double first = a_first ? arch : -arch;
        w.features[(offset + k) * config.n_variables] += first;
        w.features[(offset + motif_len + k) * config.n_variables] += -first;
    }
    return w;
}

std::vector<LabeledWindow> order_sensitive_task(const SynthConfig& config) {
    if (!config.order_sensitive) throw InvalidConfig("order_sensitive flag is not set");
    const auto [lo, hi] = order_offset_range(config);

    Rng rng(mix_seed(config.seed, "order-task"));
    std::vector<LabeledWindow> out;
    out.reserve(config.n_order_windows);
    for (std::size_t i = 0; i < config.n_order_windows; ++i) {
        const bool a_first = i % 2 == 0;  // exact class balance
        const auto offset = lo + static_cast<std::size_t>(rng.uniform_index(hi - lo + 1));
        auto w = order_sensitive_window(config, a_first, offset, rng.next_u64());
        w.start_row = i * (config.order_window_rows + 1);  // disjoint spans
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace failbench
