#include "propml/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "propml/errors.hpp"
#include "propml/rng.hpp"

namespace propml {

namespace {

inline double relu(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

MlpModel::MlpModel(const Matrix& train, const std::vector<double>& targets, MlpConfig cfg)
    : n_inputs_(train.cols), cfg_(std::move(cfg)) {
    if (train.rows == 0) throw EmptyTrainingSet();
    if (targets.size() != train.rows) throw DimensionMismatch(targets.size(), train.rows);
    for (int w : cfg_.hidden_layers)
        if (w < 1) throw ModelError("hidden layer widths must be >= 1");
    if (cfg_.batch_size < 1) throw ModelError("batch_size must be >= 1");

    widths_.push_back(static_cast<int>(n_inputs_));
    for (int w : cfg_.hidden_layers) widths_.push_back(w);
    widths_.push_back(1);

    Rng rng(cfg_.seed);
    const std::size_t layers = widths_.size() - 1;
    weights_.resize(layers);
    biases_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const auto fan_in = static_cast<std::size_t>(widths_[l]);
        const auto fan_out = static_cast<std::size_t>(widths_[l + 1]);
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        weights_[l] = Matrix(fan_out, fan_in);
        for (auto& v : weights_[l].data) v = rng.uniform(-bound, bound);
        biases_[l].resize(fan_out);
        for (auto& v : biases_[l]) v = rng.uniform(-bound, bound);
    }

    // Adam state, one slot per parameter tensor.
    std::vector<Matrix> m_w(layers), v_w(layers);
    std::vector<std::vector<double>> m_b(layers), v_b(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        m_w[l] = Matrix(weights_[l].rows, weights_[l].cols);
        v_w[l] = Matrix(weights_[l].rows, weights_[l].cols);
        m_b[l].assign(biases_[l].size(), 0.0);
        v_b[l].assign(biases_[l].size(), 0.0);
    }

    std::vector<std::size_t> order(train.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<Matrix> activations;
    std::vector<std::size_t> batch_rows;
    double best_loss = std::numeric_limits<double>::infinity();
    int no_improvement = 0;
    long step = 0;

    for (int epoch = 0; epoch < cfg_.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg_.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg_.batch_size));
            batch_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                              order.begin() + static_cast<std::ptrdiff_t>(end));
            const auto m = static_cast<double>(batch_rows.size());

            forward_batch(train, batch_rows, activations);

            // Batch loss for the history/stopping rule.
            double batch_loss = 0.0;
            for (std::size_t i = 0; i < batch_rows.size(); ++i) {
                const double err = activations.back().at(i, 0) - targets[batch_rows[i]];
                batch_loss += err * err;
            }
            batch_loss /= 2.0 * m;
            double l2 = 0.0;
            for (const auto& w : weights_)
                for (double v : w.data) l2 += v * v;
            batch_loss += cfg_.l2_alpha * l2 / (2.0 * m);
            epoch_loss += batch_loss * m;

            std::vector<double> batch_targets(batch_rows.size());
            for (std::size_t i = 0; i < batch_rows.size(); ++i)
                batch_targets[i] = targets[batch_rows[i]];
            Gradients grads = backward_batch(train, batch_rows, batch_targets, activations);

            ++step;
            const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step));
            auto adam_update = [&](double& param, double g, double& m1, double& m2) {
                m1 = cfg_.beta1 * m1 + (1.0 - cfg_.beta1) * g;
                m2 = cfg_.beta2 * m2 + (1.0 - cfg_.beta2) * g * g;
                param -= cfg_.learning_rate * (m1 / bc1) / (std::sqrt(m2 / bc2) + cfg_.adam_eps);
            };
            for (std::size_t l = 0; l < layers; ++l) {
                for (std::size_t p = 0; p < weights_[l].data.size(); ++p)
                    adam_update(weights_[l].data[p], grads.weights[l].data[p], m_w[l].data[p],
                                v_w[l].data[p]);
                for (std::size_t p = 0; p < biases_[l].size(); ++p)
                    adam_update(biases_[l][p], grads.biases[l][p], m_b[l][p], v_b[l][p]);
            }
        }
        epoch_loss /= static_cast<double>(train.rows);
        if (!std::isfinite(epoch_loss)) throw NonFiniteLoss(epoch);
        loss_history_.push_back(epoch_loss);

        if (epoch_loss > best_loss - cfg_.patience_tol) ++no_improvement;
        else no_improvement = 0;
        best_loss = std::min(best_loss, epoch_loss);
        if (no_improvement >= cfg_.patience) break;
    }
}

void MlpModel::forward_batch(const Matrix& x, const std::vector<std::size_t>& rows,
                             std::vector<Matrix>& activations) const {
    const std::size_t layers = weights_.size();
    const std::size_t m = rows.size();
    activations.assign(layers + 1, Matrix());
    activations[0] = Matrix(m, n_inputs_);
    for (std::size_t i = 0; i < m; ++i) {
        const auto src = x.row(rows[i]);
        std::copy(src.begin(), src.end(), activations[0].row(i).begin());
    }
    for (std::size_t l = 0; l < layers; ++l) {
        const Matrix& w = weights_[l];
        const Matrix& in = activations[l];
        Matrix out(m, w.rows);
        for (std::size_t i = 0; i < m; ++i) {
            const auto in_row = in.row(i);
            for (std::size_t u = 0; u < w.rows; ++u) {
                const auto w_row = w.row(u);
                double s = biases_[l][u];
                for (std::size_t c = 0; c < w.cols; ++c) s += w_row[c] * in_row[c];
                out.at(i, u) = l + 1 < widths_.size() - 1 ? relu(s) : s;
            }
        }
        activations[l + 1] = std::move(out);
    }
}

MlpModel::Gradients MlpModel::backward_batch(const Matrix&, const std::vector<std::size_t>& rows,
                                             const std::vector<double>& y,
                                             const std::vector<Matrix>& activations) const {
    const std::size_t layers = weights_.size();
    const auto m = static_cast<double>(rows.size());

    Gradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        grads.weights[l] = Matrix(weights_[l].rows, weights_[l].cols);
        grads.biases[l].assign(biases_[l].size(), 0.0);
    }

    // delta = dLoss/d(pre-activation) for the current layer.
    Matrix delta(rows.size(), 1);
    for (std::size_t i = 0; i < rows.size(); ++i)
        delta.at(i, 0) = (activations.back().at(i, 0) - y[i]) / m;

    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& in = activations[l];
        Matrix& gw = grads.weights[l];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto in_row = in.row(i);
            for (std::size_t u = 0; u < gw.rows; ++u) {
                const double d = delta.at(i, u);
                if (d == 0.0) continue;
                auto gw_row = gw.row(u);
                for (std::size_t c = 0; c < gw.cols; ++c) gw_row[c] += d * in_row[c];
                grads.biases[l][u] += d;
            }
        }
        for (std::size_t p = 0; p < gw.data.size(); ++p)
            gw.data[p] += cfg_.l2_alpha * weights_[l].data[p] / m;

        if (l == 0) break;
        const Matrix& w = weights_[l];
        Matrix prev_delta(rows.size(), w.cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t c = 0; c < w.cols; ++c) {
                if (activations[l].at(i, c) <= 0.0) continue;  // ReLU gate
                double s = 0.0;
                for (std::size_t u = 0; u < w.rows; ++u) s += w.at(u, c) * delta.at(i, u);
                prev_delta.at(i, c) = s;
            }
        }
        delta = std::move(prev_delta);
    }
    return grads;
}

double MlpModel::loss(const Matrix& x, const std::vector<double>& y) const {
    if (x.rows == 0 || x.rows != y.size()) throw DataError("loss needs a nonempty aligned batch");
    std::vector<std::size_t> rows(x.rows);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    std::vector<Matrix> activations;
    forward_batch(x, rows, activations);
    const auto m = static_cast<double>(x.rows);
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double err = activations.back().at(i, 0) - y[i];
        total += err * err;
    }
    total /= 2.0 * m;
    double l2 = 0.0;
    for (const auto& w : weights_)
        for (double v : w.data) l2 += v * v;
    return total + cfg_.l2_alpha * l2 / (2.0 * m);
}

MlpModel::Gradients MlpModel::loss_gradient(const Matrix& x, const std::vector<double>& y) const {
    if (x.rows == 0 || x.rows != y.size())
        throw DataError("loss_gradient needs a nonempty aligned batch");
    std::vector<std::size_t> rows(x.rows);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    std::vector<Matrix> activations;
    forward_batch(x, rows, activations);
    return backward_batch(x, rows, y, activations);
}

double MlpModel::predict_one(std::span<const double> row) const {
    if (row.size() != n_inputs_) throw DimensionMismatch(row.size(), n_inputs_);
    std::vector<double> current(row.begin(), row.end());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const Matrix& w = weights_[l];
        std::vector<double> next(w.rows);
        for (std::size_t u = 0; u < w.rows; ++u) {
            const auto w_row = w.row(u);
            double s = biases_[l][u];
            for (std::size_t c = 0; c < w.cols; ++c) s += w_row[c] * current[c];
            next[u] = l + 1 < widths_.size() - 1 ? relu(s) : s;
        }
        current = std::move(next);
    }
    return current[0];
}

std::vector<double> MlpModel::predict(const Matrix& queries) const {
    if (queries.cols != n_inputs_) throw DimensionMismatch(queries.cols, n_inputs_);
    std::vector<double> out(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i) out[i] = predict_one(queries.row(i));
    return out;
}

std::size_t MlpModel::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        count += weights_[l].data.size() + biases_[l].size();
    return count;
}

std::vector<double> MlpModel::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), weights_[l].data.begin(), weights_[l].data.end());
        flat.insert(flat.end(), biases_[l].begin(), biases_[l].end());
    }
    return flat;
}

void MlpModel::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count())
        throw DimensionMismatch(flat.size(), parameter_count());
    std::size_t pos = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (auto& v : weights_[l].data) v = flat[pos++];
        for (auto& v : biases_[l]) v = flat[pos++];
    }
}

MlpModel mlp_fit(const Matrix& train, const std::vector<double>& targets, const MlpConfig& cfg) {
    return MlpModel(train, targets, cfg);
}

}  // namespace propml
