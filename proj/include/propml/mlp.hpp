#pragma once

#include <cstdint>
#include <vector>

#include "propml/matrix.hpp"

namespace propml {

struct MlpConfig {
    std::vector<int> hidden_layers = {1024};
    double learning_rate = 0.001;
    int batch_size = 200;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double l2_alpha = 1e-4;
    int max_epochs = 200;
    int patience = 10;          // epochs without improvement before stopping
    double patience_tol = 1e-4;
    std::uint64_t seed = 0;

    // Two hidden layers of 256 and 128 units.
    static MlpConfig recommended() {
        MlpConfig cfg;
        cfg.hidden_layers = {256, 128};
        return cfg;
    }
};

// ReLU feed-forward regressor with a linear output unit, trained by Adam on
// shuffled mini-batches of the halved-MSE loss plus an L2 penalty.
class MlpModel {
public:
    struct Gradients {
        std::vector<Matrix> weights;
        std::vector<std::vector<double>> biases;
    };

    MlpModel(const Matrix& train, const std::vector<double>& targets, MlpConfig cfg);

    std::vector<double> predict(const Matrix& queries) const;
    double predict_one(std::span<const double> row) const;

    // Batch loss and its analytic gradients at the current parameters; the
    // L2 term is scaled by the batch size, matching the training updates.
    double loss(const Matrix& x, const std::vector<double>& y) const;
    Gradients loss_gradient(const Matrix& x, const std::vector<double>& y) const;

    const std::vector<double>& loss_history() const { return loss_history_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    // Flat parameter access for gradient checking.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);
    std::size_t parameter_count() const;

private:
    void forward_batch(const Matrix& x, const std::vector<std::size_t>& rows,
                       std::vector<Matrix>& activations) const;
    Gradients backward_batch(const Matrix& x, const std::vector<std::size_t>& rows,
                             const std::vector<double>& y,
                             const std::vector<Matrix>& activations) const;

    std::size_t n_inputs_ = 0;
    std::vector<int> widths_;          // input, hidden..., 1
    std::vector<Matrix> weights_;      // weights_[l]: widths_[l+1] x widths_[l]
    std::vector<std::vector<double>> biases_;
    std::vector<double> loss_history_;
    MlpConfig cfg_;
};

MlpModel mlp_fit(const Matrix& train, const std::vector<double>& targets, const MlpConfig& cfg);

}  // namespace propml
