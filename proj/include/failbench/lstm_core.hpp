#pragma once

#include <cstdint>
#include <vector>

#include "failbench/losses.hpp"
#include "failbench/models.hpp"

namespace failbench {

// Single-layer LSTM with a one-logit affine head over the final hidden
// state (forward and backward states concatenated when bidirectional).
//
// All parameters live in one flat vector so training, serialization and
// finite-difference checks share the same view. Per direction the layout is
//   W_x (V x 4H) | W_h (H x 4H) | b (4H)
// with gate blocks ordered [input, forget, cell, output] along the 4H axis,
// followed by the head weights (H or 2H) and the head bias.
class LstmCore {
public:
    LstmCore(std::size_t n_vars, std::size_t hidden, bool bidirectional);

    std::size_t n_params() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::size_t hidden() const { return hidden_; }
    bool bidirectional() const { return bidirectional_; }

    // Uniform init in +-1/sqrt(hidden).
    void init_params(std::uint64_t seed);

    // x holds one window per row, row-major time x variable; returns one
    // logit per row.
    std::vector<double> forward(const Matrix& x, std::size_t seq_len) const;

    struct LossGrad {
        double value = 0.0;
        std::vector<double> grad;  // d loss / d params, flat
    };
    LossGrad loss_and_grad(const Matrix& x, std::size_t seq_len, const std::vector<int>& y,
                           const LossConfig& loss) const;

private:
    std::size_t n_vars_;
    std::size_t hidden_;
    bool bidirectional_;
    std::vector<double> params_;
};

}  // namespace failbench
