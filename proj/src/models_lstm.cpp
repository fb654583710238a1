#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "failbench/errors.hpp"
#include "failbench/lstm_core.hpp"
#include "failbench/models.hpp"
#include "failbench/rng.hpp"

namespace failbench {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<Mat>;
using ConstMapMat = Eigen::Map<const Mat>;
using Vec = Eigen::VectorXd;

struct DirOffsets {
    std::size_t wx, wh, b;
};

struct Layout {
    std::size_t n_vars, hidden;
    bool bidirectional;

    std::size_t per_dir() const { return (n_vars + hidden + 1) * 4 * hidden; }
    std::size_t head_inputs() const { return (bidirectional ? 2 : 1) * hidden; }
    std::size_t total() const {
        return (bidirectional ? 2 : 1) * per_dir() + head_inputs() + 1;
    }
    DirOffsets dir(std::size_t d) const {
        const std::size_t base = d * per_dir();
        return {base, base + n_vars * 4 * hidden, base + (n_vars + hidden) * 4 * hidden};
    }
    std::size_t head_w() const { return (bidirectional ? 2 : 1) * per_dir(); }
    std::size_t head_b() const { return head_w() + head_inputs(); }
};

inline double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

// One direction's forward scan with everything BPTT needs.
struct DirectionTrace {
    std::vector<Mat> gates;   // per step, B x 4H post-activation [i f g o]
    std::vector<Mat> cell;    // per step, B x H
    std::vector<Mat> hidden;  // per step, B x H
    Mat final_hidden;         // B x H
};

DirectionTrace run_direction(const Matrix& x, std::size_t seq_len, std::size_t n_vars,
                             std::size_t hidden, const double* p, const DirOffsets& off,
                             bool reverse, bool keep_trace) {
    const std::size_t batch = x.rows;
    ConstMapMat wx(p + off.wx, n_vars, 4 * hidden);
    ConstMapMat wh(p + off.wh, hidden, 4 * hidden);
    Eigen::Map<const Eigen::RowVectorXd> bias(p + off.b, 4 * hidden);

    DirectionTrace trace;
    if (keep_trace) {
        trace.gates.reserve(seq_len);
        trace.cell.reserve(seq_len);
        trace.hidden.reserve(seq_len);
    }

    Mat h = Mat::Zero(batch, hidden);
    Mat c = Mat::Zero(batch, hidden);
    Mat xt(batch, n_vars);
    for (std::size_t step = 0; step < seq_len; ++step) {
        const std::size_t t = reverse ? seq_len - 1 - step : step;
        for (std::size_t bi = 0; bi < batch; ++bi) {
            for (std::size_t v = 0; v < n_vars; ++v) xt(bi, v) = x.at(bi, t * n_vars + v);
        }
        Mat g = xt * wx + h * wh;
        g.rowwise() += bias;
        for (std::size_t bi = 0; bi < batch; ++bi) {
            for (std::size_t k = 0; k < hidden; ++k) {
                const double gi = sigmoid(g(bi, k));
                const double gf = sigmoid(g(bi, hidden + k));
                const double gg = std::tanh(g(bi, 2 * hidden + k));
                const double go = sigmoid(g(bi, 3 * hidden + k));
                g(bi, k) = gi;
                g(bi, hidden + k) = gf;
                g(bi, 2 * hidden + k) = gg;
                g(bi, 3 * hidden + k) = go;
                c(bi, k) = gf * c(bi, k) + gi * gg;
                h(bi, k) = go * std::tanh(c(bi, k));
            }
        }
        if (keep_trace) {
            trace.gates.push_back(g);
            trace.cell.push_back(c);
            trace.hidden.push_back(h);
        }
    }
    trace.final_hidden = h;
    return trace;
}

// Reverse scan of one direction; accumulates parameter gradients and needs
// the forward trace. d_final is dLoss/d(final hidden state).
void backward_direction(const Matrix& x, std::size_t seq_len, std::size_t n_vars,
                        std::size_t hidden, const double* p, const DirOffsets& off, bool reverse,
                        const DirectionTrace& trace, const Mat& d_final, double* grad) {
    const std::size_t batch = x.rows;
    ConstMapMat wx(p + off.wx, n_vars, 4 * hidden);
    ConstMapMat wh(p + off.wh, hidden, 4 * hidden);
    MapMat gwx(grad + off.wx, n_vars, 4 * hidden);
    MapMat gwh(grad + off.wh, hidden, 4 * hidden);
    Eigen::Map<Eigen::RowVectorXd> gbias(grad + off.b, 4 * hidden);

    Mat dh = d_final;
    Mat dc = Mat::Zero(batch, hidden);
    Mat dg(batch, 4 * hidden);
    Mat xt(batch, n_vars);

    for (std::size_t step = seq_len; step-- > 0;) {
        const std::size_t t = reverse ? seq_len - 1 - step : step;
        const Mat& g = trace.gates[step];
        const Mat& c = trace.cell[step];

        for (std::size_t bi = 0; bi < batch; ++bi) {
            for (std::size_t k = 0; k < hidden; ++k) {
                const double gi = g(bi, k);
                const double gf = g(bi, hidden + k);
                const double gg = g(bi, 2 * hidden + k);
                const double go = g(bi, 3 * hidden + k);
                const double tc = std::tanh(c(bi, k));
                const double c_prev = step > 0 ? trace.cell[step - 1](bi, k) : 0.0;

                const double dout = dh(bi, k);
                double dck = dc(bi, k) + dout * go * (1.0 - tc * tc);
                dg(bi, k) = dck * gg * gi * (1.0 - gi);
                dg(bi, hidden + k) = dck * c_prev * gf * (1.0 - gf);
                dg(bi, 2 * hidden + k) = dck * gi * (1.0 - gg * gg);
                dg(bi, 3 * hidden + k) = dout * tc * go * (1.0 - go);
                dc(bi, k) = dck * gf;
            }
        }
        for (std::size_t bi = 0; bi < batch; ++bi) {
            for (std::size_t v = 0; v < n_vars; ++v) xt(bi, v) = x.at(bi, t * n_vars + v);
        }
        gwx.noalias() += xt.transpose() * dg;
        if (step > 0) gwh.noalias() += trace.hidden[step - 1].transpose() * dg;
        gbias += dg.colwise().sum();
        dh.noalias() = dg * wh.transpose();
    }
}

}  // namespace

LstmCore::LstmCore(std::size_t n_vars, std::size_t hidden, bool bidirectional)
    : n_vars_(n_vars), hidden_(hidden), bidirectional_(bidirectional) {
    if (n_vars == 0 || hidden == 0) throw InvalidConfig("LSTM needs input and hidden width >= 1");
    params_.assign(Layout{n_vars, hidden, bidirectional}.total(), 0.0);
}

void LstmCore::init_params(std::uint64_t seed) {
    Rng rng(mix_seed(seed, "lstm-init"));
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (auto& p : params_) p = rng.uniform(-bound, bound);
}

std::vector<double> LstmCore::forward(const Matrix& x, std::size_t seq_len) const {
    const Layout layout{n_vars_, hidden_, bidirectional_};
    if (x.cols != seq_len * n_vars_) throw ShapeMismatch("window shape differs from training");
    const double* p = params_.data();

    const auto fwd = run_direction(x, seq_len, n_vars_, hidden_, p, layout.dir(0), false, false);
    Mat cat = fwd.final_hidden;
    if (bidirectional_) {
        const auto bwd = run_direction(x, seq_len, n_vars_, hidden_, p, layout.dir(1), true, false);
        Mat both(x.rows, 2 * hidden_);
        both << fwd.final_hidden, bwd.final_hidden;
        cat = std::move(both);
    }
    Eigen::Map<const Vec> head_w(p + layout.head_w(), static_cast<Eigen::Index>(layout.head_inputs()));
    const double head_b = p[layout.head_b()];

    std::vector<double> logits(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        logits[i] = cat.row(static_cast<Eigen::Index>(i)).dot(head_w) + head_b;
    }
    return logits;
}

LstmCore::LossGrad LstmCore::loss_and_grad(const Matrix& x, std::size_t seq_len,
                                           const std::vector<int>& y,
                                           const LossConfig& loss) const {
    const Layout layout{n_vars_, hidden_, bidirectional_};
    if (x.cols != seq_len * n_vars_) throw ShapeMismatch("window shape differs from training");
    if (x.rows != y.size()) throw LengthMismatch("feature/label count mismatch");
    const double* p = params_.data();
    const std::size_t batch = x.rows;

    const auto fwd = run_direction(x, seq_len, n_vars_, hidden_, p, layout.dir(0), false, true);
    DirectionTrace bwd;
    if (bidirectional_) {
        bwd = run_direction(x, seq_len, n_vars_, hidden_, p, layout.dir(1), true, true);
    }

    Mat cat(batch, layout.head_inputs());
    if (bidirectional_) cat << fwd.final_hidden, bwd.final_hidden;
    else cat = fwd.final_hidden;

    Eigen::Map<const Vec> head_w(p + layout.head_w(), static_cast<Eigen::Index>(layout.head_inputs()));
    const double head_b = p[layout.head_b()];

    std::vector<double> logits(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        logits[i] = cat.row(static_cast<Eigen::Index>(i)).dot(head_w) + head_b;
    }

    const LossValueGrad lv = loss_value_grad(loss, logits, y);

    LossGrad out;
    out.value = lv.value;
    out.grad.assign(params_.size(), 0.0);
    double* grad = out.grad.data();

    Eigen::Map<Vec> g_head_w(grad + layout.head_w(), static_cast<Eigen::Index>(layout.head_inputs()));
    Mat d_cat(batch, layout.head_inputs());
    for (std::size_t i = 0; i < batch; ++i) {
        g_head_w += lv.grad[i] * cat.row(static_cast<Eigen::Index>(i)).transpose();
        grad[layout.head_b()] += lv.grad[i];
        d_cat.row(static_cast<Eigen::Index>(i)) = lv.grad[i] * head_w.transpose();
    }

    const Mat d_fwd = d_cat.leftCols(static_cast<Eigen::Index>(hidden_));
    backward_direction(x, seq_len, n_vars_, hidden_, p, layout.dir(0), false, fwd, d_fwd, grad);
    if (bidirectional_) {
        const Mat d_bwd = d_cat.rightCols(static_cast<Eigen::Index>(hidden_));
        backward_direction(x, seq_len, n_vars_, hidden_, p, layout.dir(1), true, bwd, d_bwd, grad);
    }
    return out;
}

LstmModel train_lstm(const Matrix& x, std::size_t seq_len, std::size_t n_vars,
                     const std::vector<int>& y, const LstmHyper& hyper, std::uint64_t seed) {
    if (x.rows != y.size()) throw LengthMismatch("feature/label count mismatch");
    if (x.rows < 2) throw SingleClassInput("training requires at least two samples");
    {
        bool pos = false, neg = false;
        for (int v : y) (v != 0 ? pos : neg) = true;
        if (!pos || !neg) throw SingleClassInput("training requires both classes");
    }
    if (hyper.hidden_size < 1 || hyper.epochs < 1 || hyper.batch_size < 1 ||
        hyper.learning_rate <= 0.0) {
        throw InvalidConfig("invalid LSTM hyperparameters");
    }

    LstmCore core(n_vars, static_cast<std::size_t>(hyper.hidden_size), hyper.bidirectional);
    core.init_params(seed);

    // Hold out the tail of a seeded shuffle for early stopping.
    std::vector<std::size_t> order(x.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng(mix_seed(seed, "lstm-split"));
    split_rng.shuffle(order);

    std::size_t val_n = 0;
    if (hyper.validation_fraction > 0.0 && hyper.patience > 0) {
        val_n = static_cast<std::size_t>(hyper.validation_fraction * static_cast<double>(x.rows));
        if (x.rows - val_n < 2) val_n = 0;
    }
    const std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(val_n));
    const std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(val_n), order.end());

    // Early stopping needs both classes in the training part; fall back to
    // using everything when the shuffle is that unlucky.
    bool train_has_both = false;
    {
        bool pos = false, neg = false;
        for (std::size_t i : train_idx) (y[i] != 0 ? pos : neg) = true;
        train_has_both = pos && neg;
    }
    const auto& effective_train = train_has_both && val_n > 0 ? train_idx : order;
    const bool early_stop = train_has_both && val_n > 0 && hyper.patience > 0;

    auto gather = [&](const std::vector<std::size_t>& idx) {
        Matrix gx(idx.size(), x.cols);
        std::vector<int> gy(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::copy(x.row(idx[i]), x.row(idx[i]) + x.cols,
                      gx.data.begin() + static_cast<std::ptrdiff_t>(i * x.cols));
            gy[i] = y[idx[i]];
        }
        return std::pair{std::move(gx), std::move(gy)};
    };
    const auto [val_x, val_y] = gather(val_idx);

    // Adam state.
    std::vector<double> m(core.n_params(), 0.0), v(core.n_params(), 0.0);
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    std::size_t adam_t = 0;

    std::vector<std::size_t> epoch_order(effective_train);
    std::vector<double> best_params = core.params();
    double best_val = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        Rng epoch_rng(mix_seed(seed, "lstm-epoch", static_cast<std::uint64_t>(epoch)));
        epoch_rng.shuffle(epoch_order);

        for (std::size_t begin = 0; begin < epoch_order.size();
             begin += static_cast<std::size_t>(hyper.batch_size)) {
            const std::size_t end =
                std::min(epoch_order.size(), begin + static_cast<std::size_t>(hyper.batch_size));
            const std::vector<std::size_t> batch_idx(epoch_order.begin() + static_cast<std::ptrdiff_t>(begin),
                                                     epoch_order.begin() + static_cast<std::ptrdiff_t>(end));
            const auto [bx, by] = gather(batch_idx);
            const auto lg = core.loss_and_grad(bx, seq_len, by, hyper.loss);
            if (!std::isfinite(lg.value)) throw NonFiniteLoss("LSTM batch loss is not finite");

            ++adam_t;
            const double corr1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_t));
            const double corr2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_t));
            auto& params = core.params();
            for (std::size_t i = 0; i < params.size(); ++i) {
                m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * lg.grad[i];
                v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * lg.grad[i] * lg.grad[i];
                params[i] -= hyper.learning_rate * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + kEps);
            }
        }

        if (early_stop) {
            const auto val_logits = core.forward(val_x, seq_len);
            const double val_loss = loss_value(hyper.loss, val_logits, val_y);
            if (!std::isfinite(val_loss)) throw NonFiniteLoss("LSTM validation loss is not finite");
            if (val_loss < best_val - 1e-12) {
                best_val = val_loss;
                best_params = core.params();
                bad_epochs = 0;
            } else if (++bad_epochs > hyper.patience) {
                break;
            }
        }
    }
    if (early_stop) core.params() = best_params;

    LstmModel model;
    model.hidden_size = static_cast<std::size_t>(hyper.hidden_size);
    model.bidirectional = hyper.bidirectional;
    model.seq_len = seq_len;
    model.n_vars = n_vars;
    model.params = core.params();
    return model;
}

std::vector<Prediction> predict_lstm(const LstmModel& model, const Matrix& x) {
    LstmCore core(model.n_vars, model.hidden_size, model.bidirectional);
    core.params() = model.params;
    const auto logits = core.forward(x, model.seq_len);
    std::vector<Prediction> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double p = sigmoid(logits[i]);
        out[i] = {p, p >= 0.5 ? 1 : 0};
    }
    return out;
}

}  // namespace failbench
