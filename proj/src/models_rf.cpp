#include <algorithm>
#include <cmath>
#include <numeric>

#include "failbench/errors.hpp"
#include "failbench/models.hpp"
#include "failbench/rng.hpp"

namespace failbench {

namespace {

struct TreeBuilder {
    const Matrix& x;
    const std::vector<int>& y;
    std::size_t mtry;
    Rng& rng;
    Tree tree;

    // Candidate features are a fresh uniform subset at every split.
    std::vector<std::size_t> feature_pool;

    int majority(const std::vector<std::size_t>& idx) const {
        std::size_t pos = 0;
        for (std::size_t i : idx) pos += y[i] != 0 ? 1 : 0;
        return pos > idx.size() - pos ? 1 : 0;  // tie -> no_failure
    }

    bool pure(const std::vector<std::size_t>& idx) const {
        for (std::size_t i : idx) {
            if (y[i] != y[idx.front()]) return false;
        }
        return true;
    }

    static double gini(std::size_t pos, std::size_t n) {
        if (n == 0) return 0.0;
        const double p = static_cast<double>(pos) / static_cast<double>(n);
        return 2.0 * p * (1.0 - p);
    }

    struct Split {
        std::size_t feature = 0;
        double threshold = 0.0;
        double impurity = std::numeric_limits<double>::infinity();
        bool found = false;
    };

    Split best_split(const std::vector<std::size_t>& idx) {
        Split best;
        for (std::size_t i = 0; i < mtry; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.uniform_index(feature_pool.size() - i));
            std::swap(feature_pool[i], feature_pool[j]);
        }

        const auto n = idx.size();
        std::vector<std::pair<double, int>> vals(n);
        for (std::size_t fi = 0; fi < mtry; ++fi) {
            const std::size_t f = feature_pool[fi];
            for (std::size_t i = 0; i < n; ++i) vals[i] = {x.at(idx[i], f), y[idx[i]] != 0 ? 1 : 0};
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue;

            std::size_t total_pos = 0;
            for (const auto& [v, lab] : vals) total_pos += static_cast<std::size_t>(lab);

            std::size_t left_pos = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_pos += static_cast<std::size_t>(vals[i].second);
                if (vals[i].first == vals[i + 1].first) continue;
                const std::size_t nl = i + 1;
                const std::size_t nr = n - nl;
                const double imp =
                    (static_cast<double>(nl) * gini(left_pos, nl) +
                     static_cast<double>(nr) * gini(total_pos - left_pos, nr)) /
                    static_cast<double>(n);
                if (imp < best.impurity) {
                    best = {f, 0.5 * (vals[i].first + vals[i + 1].first), imp, true};
                }
            }
        }
        return best;
    }

    int build(std::vector<std::size_t> idx) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        if (idx.size() < 2 || pure(idx)) {
            tree.nodes[node_id].label = majority(idx);
            return node_id;
        }
        const Split split = best_split(idx);
        if (!split.found) {  // all candidate features constant here
            tree.nodes[node_id].label = majority(idx);
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            (x.at(i, split.feature) <= split.threshold ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        tree.nodes[node_id].feature = static_cast<int>(split.feature);
        tree.nodes[node_id].threshold = split.threshold;
        const int left = build(std::move(left_idx));
        const int right = build(std::move(right_idx));
        tree.nodes[node_id].left = left;
        tree.nodes[node_id].right = right;
        return node_id;
    }
};

int tree_vote(const Tree& tree, const double* xi) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        const auto& n = tree.nodes[node];
        node = xi[n.feature] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[node].label;
}

}  // namespace

ForestModel train_rf(const Matrix& x, const std::vector<int>& y, int n_estimators,
                     double max_features_fraction, std::uint64_t seed) {
    if (x.rows != y.size()) throw LengthMismatch("feature/label count mismatch");
    if (x.rows == 0 || x.cols == 0) throw EmptyMatrix("random forest needs data");
    if (n_estimators < 1) throw InvalidConfig("n_estimators must be >= 1");
    if (max_features_fraction <= 0.0 || max_features_fraction > 1.0) {
        throw InvalidConfig("max_features_fraction must be in (0, 1]");
    }

    const auto mtry = std::min(
        x.cols, static_cast<std::size_t>(
                    std::ceil(max_features_fraction * static_cast<double>(x.cols))));

    ForestModel model;
    model.trees.reserve(static_cast<std::size_t>(n_estimators));
    for (int t = 0; t < n_estimators; ++t) {
        Rng rng(mix_seed(seed, "rf-tree", static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> bootstrap(x.rows);
        for (auto& i : bootstrap) i = static_cast<std::size_t>(rng.uniform_index(x.rows));

        TreeBuilder builder{x, y, std::max<std::size_t>(1, mtry), rng, {}, {}};
        builder.feature_pool.resize(x.cols);
        std::iota(builder.feature_pool.begin(), builder.feature_pool.end(), 0);
        builder.build(std::move(bootstrap));
        model.trees.push_back(std::move(builder.tree));
    }
    return model;
}

std::vector<Prediction> predict_rf(const ForestModel& model, const Matrix& x) {
    if (model.trees.empty()) throw EmptyMatrix("random forest has no trees");
    std::vector<Prediction> out(x.rows);
    const auto n_trees = model.trees.size();
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::size_t votes = 0;
        for (const auto& tree : model.trees) votes += tree_vote(tree, x.row(i)) != 0 ? 1 : 0;
        const double p = static_cast<double>(votes) / static_cast<double>(n_trees);
        // Exact tie goes to no_failure.
        out[i] = {p, 2 * votes > n_trees ? 1 : 0};
    }
    return out;
}

}  // namespace failbench
