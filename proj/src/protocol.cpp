#include "failbench/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "failbench/errors.hpp"
#include "failbench/rng.hpp"

namespace failbench {

FoldPlan plan_folds(const std::vector<LabeledWindow>& windows, std::size_t k,
                    std::uint64_t /*seed*/) {
    if (k < 2) throw InvalidConfig("k-fold needs k >= 2");
    if (windows.size() < k) throw TooFewWindows("fewer windows than folds");

    // Contiguous time blocks; the remainder goes to the earliest folds.
    FoldPlan plan;
    plan.k = k;
    plan.assignment.resize(windows.size());
    const std::size_t base = windows.size() / k;
    const std::size_t rem = windows.size() % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < rem ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) plan.assignment[pos++] = f;
    }
    return plan;
}

std::vector<FoldSplit> kfold_splits(const std::vector<LabeledWindow>& windows,
                                    const FoldPlan& plan) {
    if (plan.assignment.size() != windows.size()) throw LengthMismatch("fold plan size mismatch");
    std::vector<FoldSplit> splits(plan.k);
    for (std::size_t f = 0; f < plan.k; ++f) {
        std::vector<LabeledWindow> train, test;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            (plan.assignment[i] == f ? test : train).push_back(windows[i]);
        }
        splits[f].train = exclude_overlap(train, test);
        splits[f].test = std::move(test);
    }
    return splits;
}

namespace {

bool has_both_classes(const std::vector<LabeledWindow>& windows) {
    bool pos = false, neg = false;
    for (const auto& w : windows) (w.failure ? pos : neg) = true;
    return pos && neg;
}

std::vector<LabeledWindow> gather(const std::vector<LabeledWindow>& windows,
                                  const std::vector<std::size_t>& indices) {
    std::vector<LabeledWindow> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(windows[i]);
    return out;
}

ScoreSample evaluate_model(const ModelSpec& spec, const std::vector<LabeledWindow>& train,
                           const std::vector<LabeledWindow>& test,
                           const std::optional<ClassWeights>& weights) {
    const TrainedModel model = train_model(spec, train);
    const auto preds = predict(model, test);
    std::vector<int> y_true(test.size()), y_pred(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        y_true[i] = test[i].failure ? 1 : 0;
        y_pred[i] = preds[i].label;
    }
    const MetricsReport r = report(confusion(y_true, y_pred, weights));
    return {r.macro_f1, r.macro_precision(), r.macro_recall()};
}

struct Accumulator {
    double sum = 0.0, sum_sq = 0.0, sum_prec = 0.0, sum_rec = 0.0;
    std::size_t n = 0, failures = 0;

    void add(const std::optional<ScoreSample>& s) {
        if (!s) {
            ++failures;
            return;
        }
        sum += s->macro_f1;
        sum_sq += s->macro_f1 * s->macro_f1;
        sum_prec += s->macro_precision;
        sum_rec += s->macro_recall;
        ++n;
    }

    void fill(SettingAggregate& agg) const {
        agg.n_scores = n;
        agg.n_failures = failures;
        if (n == 0) return;
        const auto dn = static_cast<double>(n);
        agg.mean_f1 = sum / dn;
        const double var = std::max(0.0, sum_sq / dn - agg.mean_f1 * agg.mean_f1);
        agg.std_f1 = std::sqrt(var);
        agg.mean_precision = sum_prec / dn;
        agg.mean_recall = sum_rec / dn;
    }
};

// b_j / B_s / B_a chain; ties break toward the earliest index.
void finish_cell(CellResult& cell, CellStatus status) {
    cell.status = status;
    bool any = false;
    for (auto& algo : cell.algorithms) {
        bool found = false;
        for (std::size_t l = 0; l < algo.settings.size(); ++l) {
            if (algo.settings[l].n_scores == 0) continue;
            if (!found || algo.settings[l].mean_f1 > algo.best_score) {
                algo.best_score = algo.settings[l].mean_f1;
                algo.best_setting = l;
                found = true;
            }
        }
        if (!found) algo.best_score = std::numeric_limits<double>::quiet_NaN();
        any = any || found;
    }
    if (cell.status == CellStatus::ok && !any) cell.status = CellStatus::undefined;
    if (cell.status != CellStatus::ok) return;

    bool found = false;
    for (std::size_t j = 0; j < cell.algorithms.size(); ++j) {
        const auto& algo = cell.algorithms[j];
        if (std::isnan(algo.best_score)) continue;
        if (!found || algo.best_score > cell.best_score) {
            cell.best_score = algo.best_score;
            cell.best_algorithm = j;
            found = true;
        }
    }
}

CellResult make_cell_shell(const std::vector<LabeledWindow>& windows, const HyperGrid& grid,
                           Seconds rw_s, Seconds pw_s) {
    CellResult cell;
    cell.rw_s = rw_s;
    cell.pw_s = pw_s;
    cell.n_windows = windows.size();
    cell.support = count_support(windows);
    cell.algorithms.reserve(grid.algorithms.size());
    for (const auto& a : grid.algorithms) {
        AlgorithmResult ar;
        ar.algorithm = a.algorithm;
        ar.settings.resize(a.settings.size());
        for (std::size_t l = 0; l < a.settings.size(); ++l) {
            ar.settings[l].setting = a.settings[l];
            ar.settings[l].setting_desc = describe(a.settings[l]);
        }
        cell.algorithms.push_back(std::move(ar));
    }
    return cell;
}

}  // namespace

CellResult run_kfold_cell(const std::vector<LabeledWindow>& windows, const HyperGrid& grid,
                          const ProtocolConfig& config, std::uint64_t cell_seed,
                          Seconds rw_s, Seconds pw_s, const ScoreFn& score_override) {
    CellResult cell = make_cell_shell(windows, grid, rw_s, pw_s);
    if (config.rus_repeats < 1) throw InvalidConfig("rus_repeats must be >= 1");

    std::vector<FoldSplit> splits;
    try {
        splits = kfold_splits(windows, plan_folds(windows, config.k, cell_seed));
    } catch (const TooFewWindows&) {
        finish_cell(cell, CellStatus::undefined);
        return cell;
    }

    // A fold whose test block lacks a class (or whose train side lost one to
    // overlap exclusion) makes the cell incomputable, like the blank table
    // cells in reports.
    for (const auto& split : splits) {
        if (!has_both_classes(split.test) || !has_both_classes(split.train)) {
            finish_cell(cell, CellStatus::undefined);
            return cell;
        }
    }

    const std::size_t repeats = config.rus_repeats;
    struct FoldInstances {
        std::vector<std::vector<LabeledWindow>> train, test;
    };
    std::vector<FoldInstances> instances(splits.size());
    for (std::size_t f = 0; f < splits.size(); ++f) {
        for (std::size_t i = 0; i < repeats; ++i) {
            const auto p = random_undersample(splits[f].train,
                                              mix_seed(cell_seed, "rus-train", f, i));
            const auto r = random_undersample(splits[f].test,
                                              mix_seed(cell_seed, "rus-test", f, i));
            instances[f].train.push_back(gather(splits[f].train, p.kept_indices));
            instances[f].test.push_back(gather(splits[f].test, r.kept_indices));
        }
    }

    for (std::size_t j = 0; j < grid.algorithms.size(); ++j) {
        const auto& algo = grid.algorithms[j];
        for (std::size_t l = 0; l < algo.settings.size(); ++l) {
            Accumulator acc;
            for (std::size_t f = 0; f < splits.size(); ++f) {
                for (std::size_t ti = 0; ti < repeats; ++ti) {
                    // Paired evaluation trains on p_i and scores on r_i;
                    // crossed evaluates every train draw on every test draw.
                    const std::size_t te_begin = config.rus_pairing == RusPairing::paired ? ti : 0;
                    const std::size_t te_end =
                        config.rus_pairing == RusPairing::paired ? ti + 1 : repeats;
                    for (std::size_t te = te_begin; te < te_end; ++te) {
                        ScoreRequest req;
                        req.fold = f;
                        req.train_rus = ti;
                        req.test_rus = te;
                        req.algorithm_index = j;
                        req.setting_index = l;
                        req.train = &instances[f].train[ti];
                        req.test = &instances[f].test[te];
                        req.spec = {algo.algorithm, algo.settings[l],
                                    mix_seed(cell_seed, "model", j, l, f, ti)};
                        std::optional<ScoreSample> sample;
                        try {
                            if (score_override) {
                                sample = score_override(req);
                            } else {
                                sample = evaluate_model(req.spec, *req.train, *req.test,
                                                        std::nullopt);
                            }
                        } catch (const TrainingFailure&) {
                            sample = std::nullopt;
                        }
                        acc.add(sample);
                    }
                }
            }
            acc.fill(cell.algorithms[j].settings[l]);
            if (acc.failures > 0) cell.has_warnings = true;
        }
    }

    finish_cell(cell, CellStatus::ok);
    return cell;
}

CellResult run_holdout_cell(const std::vector<LabeledWindow>& windows, const HyperGrid& grid,
                            const ProtocolConfig& config, std::uint64_t cell_seed,
                            Seconds rw_s, Seconds pw_s) {
    CellResult cell = make_cell_shell(windows, grid, rw_s, pw_s);
    if (config.rus_repeats < 1) throw InvalidConfig("rus_repeats must be >= 1");
    const double frac_sum =
        config.train_fraction + config.validation_fraction + config.test_fraction;
    if (std::abs(frac_sum - 1.0) > 1e-9) throw InvalidConfig("split fractions must sum to 1");

    const std::size_t n = windows.size();
    const auto n_train = static_cast<std::size_t>(config.train_fraction * static_cast<double>(n));
    const auto n_val =
        static_cast<std::size_t>(config.validation_fraction * static_cast<double>(n));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
        throw TooFewWindows("holdout split leaves an empty train/validation/test set");
    }

    const std::vector<LabeledWindow> train_raw(windows.begin(),
                                               windows.begin() + static_cast<std::ptrdiff_t>(n_train));
    const std::vector<LabeledWindow> val_raw(
        windows.begin() + static_cast<std::ptrdiff_t>(n_train),
        windows.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    const std::vector<LabeledWindow> test(windows.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                                          windows.end());

    // Drop anything in earlier splits that shares rows with later ones.
    std::vector<LabeledWindow> val_and_test = val_raw;
    val_and_test.insert(val_and_test.end(), test.begin(), test.end());
    const auto train = exclude_overlap(train_raw, val_and_test);
    const auto val = exclude_overlap(val_raw, test);

    if (!has_both_classes(train) || !has_both_classes(val) || !has_both_classes(test)) {
        throw TooFewWindows("holdout split lacks a class in train, validation or test");
    }
    const ClassWeights test_weights = class_weights(test);

    const std::size_t repeats = config.rus_repeats;
    std::vector<std::vector<LabeledWindow>> train_inst(repeats), val_inst(repeats);
    for (std::size_t i = 0; i < repeats; ++i) {
        const auto p = random_undersample(train, mix_seed(cell_seed, "rus-train", i));
        const auto q = random_undersample(val, mix_seed(cell_seed, "rus-val", i));
        train_inst[i] = gather(train, p.kept_indices);
        val_inst[i] = gather(val, q.kept_indices);
    }

    for (std::size_t j = 0; j < grid.algorithms.size(); ++j) {
        const auto& algo = grid.algorithms[j];
        auto& result = cell.algorithms[j];

        // Which settings the (possibly random) search visits.
        std::vector<char> searched(algo.settings.size(), 1);
        if (config.search.random && config.search.n_draws < algo.settings.size()) {
            std::fill(searched.begin(), searched.end(), 0);
            std::vector<std::size_t> order(algo.settings.size());
            for (std::size_t l = 0; l < order.size(); ++l) order[l] = l;
            Rng rng(mix_seed(cell_seed, "search", j));
            rng.shuffle(order);
            for (std::size_t d = 0; d < config.search.n_draws; ++d) searched[order[d]] = 1;
        }

        bool found = false;
        std::size_t best_l = 0;
        double best_val_score = 0.0;
        for (std::size_t l = 0; l < algo.settings.size(); ++l) {
            if (!searched[l]) continue;
            Accumulator acc;
            for (std::size_t i = 0; i < repeats; ++i) {
                const ModelSpec spec{algo.algorithm, algo.settings[l],
                                     mix_seed(cell_seed, "model", j, l, i)};
                std::optional<ScoreSample> sample;
                try {
                    sample = evaluate_model(spec, train_inst[i], val_inst[i], std::nullopt);
                } catch (const TrainingFailure&) {
                    sample = std::nullopt;
                }
                acc.add(sample);
            }
            acc.fill(result.settings[l]);
            if (acc.failures > 0) cell.has_warnings = true;
            if (result.settings[l].n_scores > 0 &&
                (!found || result.settings[l].mean_f1 > best_val_score)) {
                best_val_score = result.settings[l].mean_f1;
                best_l = l;
                found = true;
            }
        }
        if (!found) {
            result.best_score = std::numeric_limits<double>::quiet_NaN();
            continue;
        }

        // Winner by validation score, reported by weighted test score.
        result.best_setting = best_l;
        Accumulator test_acc;
        for (std::size_t i = 0; i < repeats; ++i) {
            const ModelSpec spec{algo.algorithm, algo.settings[best_l],
                                 mix_seed(cell_seed, "model", j, best_l, i)};
            std::optional<ScoreSample> sample;
            try {
                sample = evaluate_model(spec, train_inst[i], test, test_weights);
            } catch (const TrainingFailure&) {
                sample = std::nullopt;
            }
            test_acc.add(sample);
        }
        if (test_acc.failures > 0) cell.has_warnings = true;
        result.best_score = test_acc.n > 0 ? test_acc.sum / static_cast<double>(test_acc.n)
                                           : std::numeric_limits<double>::quiet_NaN();
    }

    // The b_j values are already final here; run only the B_s/B_a step.
    cell.status = CellStatus::ok;
    bool any = false;
    for (std::size_t j = 0; j < cell.algorithms.size(); ++j) {
        const auto& algo = cell.algorithms[j];
        if (std::isnan(algo.best_score)) continue;
        if (!any || algo.best_score > cell.best_score) {
            cell.best_score = algo.best_score;
            cell.best_algorithm = j;
            any = true;
        }
    }
    if (!any) cell.status = CellStatus::undefined;
    return cell;
}

ResultTable run_grid(const DatasetBundle& data, const std::vector<Seconds>& rw_list,
                     const std::vector<Seconds>& pw_list, const HyperGrid& grid,
                     const ProtocolConfig& config, std::uint64_t seed, std::size_t jobs,
                     const ProgressFn& progress) {
    for (Seconds d : rw_list) duration_to_samples(d, data.series.period_s);
    for (Seconds d : pw_list) duration_to_samples(d, data.series.period_s);
    if (rw_list.empty() || pw_list.empty()) throw InvalidConfig("empty RW or PW grid");
    if (config.rus_repeats < 1) throw InvalidConfig("rus_repeats must be >= 1");
    if (config.kind == ProtocolKind::kfold_rus && config.k < 2) {
        throw InvalidConfig("k-fold needs k >= 2");
    }
    if (config.kind == ProtocolKind::holdout_weighted) {
        const double s = config.train_fraction + config.validation_fraction + config.test_fraction;
        if (std::abs(s - 1.0) > 1e-9) throw InvalidConfig("split fractions must sum to 1");
    }

    ResultTable table;
    table.rw_s = rw_list;
    table.pw_s = pw_list;
    table.cells.resize(rw_list.size() * pw_list.size());

    std::mutex progress_mutex;
    auto emit = [&](const CellEvent& e) {
        if (!progress) return;
        const std::lock_guard<std::mutex> lock(progress_mutex);
        progress(e);
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= table.cells.size()) return;
            const Seconds rw = rw_list[idx / pw_list.size()];
            const Seconds pw = pw_list[idx % pw_list.size()];
            emit({CellEvent::Kind::started, rw, pw, CellStatus::ok, 0.0});
            const auto t0 = std::chrono::steady_clock::now();

            const std::uint64_t cell_seed =
                mix_seed(seed, "cell", static_cast<std::uint64_t>(rw), static_cast<std::uint64_t>(pw));
            CellResult cell;
            try {
                const WindowSpec spec{duration_to_samples(rw, data.series.period_s),
                                      duration_to_samples(pw, data.series.period_s)};
                const auto windows = extract_windows(data.series, data.sessions, data.alerts, spec);
                cell = config.kind == ProtocolKind::kfold_rus
                           ? run_kfold_cell(windows, grid, config, cell_seed, rw, pw)
                           : run_holdout_cell(windows, grid, config, cell_seed, rw, pw);
            } catch (const ValidationError&) {
                // Degenerate cell (e.g. too few windows for any fold); record
                // it as undefined with the full algorithm/setting shell so
                // reports stay rectangular.
                cell = make_cell_shell({}, grid, rw, pw);
                finish_cell(cell, CellStatus::undefined);
            }
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            table.cells[idx] = std::move(cell);
            emit({CellEvent::Kind::finished, rw, pw, table.cells[idx].status, elapsed});
        }
    };

    const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, table.cells.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return table;
}

}  // namespace failbench
