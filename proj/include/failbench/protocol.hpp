#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "failbench/balance.hpp"
#include "failbench/metrics.hpp"
#include "failbench/models.hpp"
#include "failbench/sessions.hpp"
#include "failbench/windows.hpp"

namespace failbench {

// Contiguous time-ordered fold blocks of near-equal size, remainder given
// to the earliest folds. Shuffled folds would scatter overlapping windows
// across the train/test boundary and defeat overlap exclusion.
struct FoldPlan {
    std::size_t k = 5;
    std::vector<std::size_t> assignment;  // fold index per window
};

FoldPlan plan_folds(const std::vector<LabeledWindow>& windows, std::size_t k, std::uint64_t seed);

// Materialized train/test pair per fold, overlap exclusion already applied
// to the train side. The grid runner and the leakage checks share this.
struct FoldSplit {
    std::vector<LabeledWindow> train;
    std::vector<LabeledWindow> test;
};

std::vector<FoldSplit> kfold_splits(const std::vector<LabeledWindow>& windows,
                                    const FoldPlan& plan);

struct AlgorithmSettings {
    Algorithm algorithm = Algorithm::logreg;
    std::vector<Hyperparams> settings;
};

struct HyperGrid {
    std::vector<AlgorithmSettings> algorithms;
};

enum class ProtocolKind { kfold_rus, holdout_weighted };
enum class RusPairing { paired, crossed };

struct SearchConfig {
    bool random = false;
    std::size_t n_draws = 0;  // random search budget per algorithm
};

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::kfold_rus;
    std::size_t k = 5;
    std::size_t rus_repeats = 10;
    RusPairing rus_pairing = RusPairing::paired;
    double train_fraction = 0.6;
    double validation_fraction = 0.2;
    double test_fraction = 0.2;
    SearchConfig search;
};

enum class CellStatus { ok, undefined };

struct SettingAggregate {
    Hyperparams setting;
    std::string setting_desc;
    double mean_f1 = 0.0;
    double std_f1 = 0.0;
    double mean_precision = 0.0;  // macro precision
    double mean_recall = 0.0;     // macro recall
    std::size_t n_scores = 0;     // scores that entered the mean
    std::size_t n_failures = 0;   // model trainings that failed
};

struct AlgorithmResult {
    Algorithm algorithm = Algorithm::logreg;
    std::vector<SettingAggregate> settings;
    std::size_t best_setting = 0;
    double best_score = 0.0;  // kfold: max_l mean; holdout: test score of the pick
};

struct CellResult {
    Seconds rw_s = 0;
    Seconds pw_s = 0;
    CellStatus status = CellStatus::undefined;
    std::size_t n_windows = 0;
    std::size_t support = 0;  // failure-labeled windows in the cell
    std::vector<AlgorithmResult> algorithms;
    std::size_t best_algorithm = 0;  // index into algorithms
    double best_score = 0.0;
    bool has_warnings = false;  // some model instances failed to train
};

struct ResultTable {
    std::vector<Seconds> rw_s;
    std::vector<Seconds> pw_s;
    std::vector<CellResult> cells;  // rw-major

    const CellResult& at(std::size_t rw_idx, std::size_t pw_idx) const {
        return cells[rw_idx * pw_s.size() + pw_idx];
    }
};

// Mean/max chain over the per-instance score tensor: m_jl over (rus, fold),
// b_j = max_l, best = max_j with ties toward the earliest index.
struct ScoreSample {
    double macro_f1 = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
};

// Seam used by the aggregation oracle tests: given (fold, rus draw,
// algorithm, setting) produce one evaluation, or nullopt for a training
// failure. The default trains the real model and scores it.
struct ScoreRequest {
    std::size_t fold = 0;
    std::size_t train_rus = 0;
    std::size_t test_rus = 0;
    std::size_t algorithm_index = 0;
    std::size_t setting_index = 0;
    const std::vector<LabeledWindow>* train = nullptr;
    const std::vector<LabeledWindow>* test = nullptr;
    ModelSpec spec;
};
using ScoreFn = std::function<std::optional<ScoreSample>(const ScoreRequest&)>;

CellResult run_kfold_cell(const std::vector<LabeledWindow>& windows, const HyperGrid& grid,
                          const ProtocolConfig& config, std::uint64_t cell_seed,
                          Seconds rw_s, Seconds pw_s, const ScoreFn& score_override = nullptr);

CellResult run_holdout_cell(const std::vector<LabeledWindow>& windows, const HyperGrid& grid,
                            const ProtocolConfig& config, std::uint64_t cell_seed,
                            Seconds rw_s, Seconds pw_s);

// Inputs shared by every cell of a grid run.
struct DatasetBundle {
    RegularSeries series;
    SessionMap sessions;
    AlertLog alerts;  // already filtered to the target code
};

struct CellEvent {
    enum class Kind { started, finished } kind = Kind::started;
    Seconds rw_s = 0;
    Seconds pw_s = 0;
    CellStatus status = CellStatus::ok;
    double elapsed_s = 0.0;
};
using ProgressFn = std::function<void(const CellEvent&)>;

// One CellResult per (rw, pw) pair, computed by a bounded worker pool.
// Per-cell seeds derive from (seed, rw, pw) so the table is bit-identical
// at any worker count. Cells whose folds cannot be formed come back
// status=undefined instead of failing the run.
ResultTable run_grid(const DatasetBundle& data, const std::vector<Seconds>& rw_list,
                     const std::vector<Seconds>& pw_list, const HyperGrid& grid,
                     const ProtocolConfig& config, std::uint64_t seed, std::size_t jobs,
                     const ProgressFn& progress = nullptr);

}  // namespace failbench
