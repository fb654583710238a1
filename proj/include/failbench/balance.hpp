#pragma once

#include <cstdint>
#include <vector>

#include "failbench/windows.hpp"

namespace failbench {

// Result of one random-undersampling draw: indices into the source window
// list, exactly balanced, minority class fully retained.
struct RusInstance {
    std::vector<std::size_t> kept_indices;  // ascending
    std::uint64_t seed = 0;
};

struct ClassWeights {
    double w_failure = 1.0;
    double w_no_failure = 1.0;
};

// Keep every minority window, sample the majority uniformly without
// replacement down to the minority count. Deterministic per seed.
RusInstance random_undersample(const std::vector<LabeledWindow>& windows, std::uint64_t seed);

// Remove train windows whose full RW+PW row span intersects any test
// window's span within the same session.
std::vector<LabeledWindow> exclude_overlap(const std::vector<LabeledWindow>& train,
                                           const std::vector<LabeledWindow>& test);

// Balanced-weight convention: w_c = total / (2 * count_c).
ClassWeights class_weights(const std::vector<LabeledWindow>& windows);

}  // namespace failbench
