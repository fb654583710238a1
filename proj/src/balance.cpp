#include "failbench/balance.hpp"

#include <algorithm>
#include <map>

#include "failbench/errors.hpp"
#include "failbench/rng.hpp"

namespace failbench {

RusInstance random_undersample(const std::vector<LabeledWindow>& windows, std::uint64_t seed) {
    std::vector<std::size_t> failure_idx;
    std::vector<std::size_t> normal_idx;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        (windows[i].failure ? failure_idx : normal_idx).push_back(i);
    }
    if (failure_idx.empty() || normal_idx.empty()) {
        throw NoMinoritySamples("random undersampling needs at least one window of each class");
    }

    auto& minority = failure_idx.size() <= normal_idx.size() ? failure_idx : normal_idx;
    auto& majority = failure_idx.size() <= normal_idx.size() ? normal_idx : failure_idx;

    RusInstance out;
    out.seed = seed;
    out.kept_indices = minority;
    if (majority.size() == minority.size()) {
        out.kept_indices.insert(out.kept_indices.end(), majority.begin(), majority.end());
    } else {
        // Partial Fisher-Yates: the first `minority.size()` slots are a
        // uniform sample without replacement.
        Rng rng(seed);
        for (std::size_t i = 0; i < minority.size(); ++i) {
            const auto j = i + static_cast<std::size_t>(rng.uniform_index(majority.size() - i));
            std::swap(majority[i], majority[j]);
        }
        out.kept_indices.insert(out.kept_indices.end(), majority.begin(),
                                majority.begin() + static_cast<std::ptrdiff_t>(minority.size()));
    }
    std::sort(out.kept_indices.begin(), out.kept_indices.end());
    return out;
}

std::vector<LabeledWindow> exclude_overlap(const std::vector<LabeledWindow>& train,
                                           const std::vector<LabeledWindow>& test) {
    // Merge test spans per session so each train window needs one lookup.
    std::map<int, std::vector<std::pair<std::size_t, std::size_t>>> spans_by_session;
    for (const auto& w : test) {
        spans_by_session[w.session_id].emplace_back(w.span_first(), w.span_last());
    }
    for (auto& [id, spans] : spans_by_session) {
        std::sort(spans.begin(), spans.end());
        std::vector<std::pair<std::size_t, std::size_t>> merged;
        for (const auto& s : spans) {
            if (!merged.empty() && s.first <= merged.back().second + 1) {
                merged.back().second = std::max(merged.back().second, s.second);
            } else {
                merged.push_back(s);
            }
        }
        spans = std::move(merged);
    }

    std::vector<LabeledWindow> kept;
    kept.reserve(train.size());
    for (const auto& w : train) {
        const auto it = spans_by_session.find(w.session_id);
        bool overlaps = false;
        if (it != spans_by_session.end()) {
            const auto& spans = it->second;
            // First merged span whose end is >= our start; it overlaps iff it
            // also begins at or before our end.
            auto lo = std::lower_bound(spans.begin(), spans.end(), w.span_first(),
                                       [](const auto& s, std::size_t first) { return s.second < first; });
            overlaps = lo != spans.end() && lo->first <= w.span_last();
        }
        if (!overlaps) kept.push_back(w);
    }
    return kept;
}

ClassWeights class_weights(const std::vector<LabeledWindow>& windows) {
    std::size_t failures = count_support(windows);
    std::size_t normals = windows.size() - failures;
    if (failures == 0 || normals == 0) {
        throw NoMinoritySamples("class weights need both classes present");
    }
    const auto total = static_cast<double>(windows.size());
    return {total / (2.0 * static_cast<double>(failures)),
            total / (2.0 * static_cast<double>(normals))};
}

}  // namespace failbench
